#pragma once

#include <cstdint>
#include <random>

namespace decay_spectra {

using Rng = std::mt19937_64;

// splitmix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-trial seed. For a fixed master seed the map trial -> seed is injective
// because splitmix64 is a bijection and the inner xor-multiply is injective
// in the trial index.
constexpr std::uint64_t trial_seed(std::uint64_t master_seed,
                                   std::uint64_t trial_index) noexcept {
  return splitmix64(splitmix64(master_seed) ^ (trial_index * 0xd1b54a32d192ed03ULL));
}

// Independent named streams derived from one seed (path, decoration, pick, ...).
enum class Stream : std::uint64_t {
  Path = 1,
  Decoration = 2,
  Pick = 3,
  Limit = 4,
  Eigenvector = 5,
};

constexpr std::uint64_t stream_seed(std::uint64_t seed, Stream stream) noexcept {
  return splitmix64(seed ^ (static_cast<std::uint64_t>(stream) << 56));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace decay_spectra
