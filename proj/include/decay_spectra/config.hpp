#pragma once

// Experiment configuration: JSON schema, validation, seed override, hash.

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"

#include "errors.hpp"
#include "format.hpp"
#include "pointproc.hpp"
#include "potential.hpp"

namespace decay_spectra {

enum class Experiment { Local, Global, LimitOnly, CrossCheck };

inline const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::Local: return "local";
    case Experiment::Global: return "global";
    case Experiment::LimitOnly: return "limit";
    case Experiment::CrossCheck: return "crosscheck";
  }
  return "?";
}

inline Experiment parse_experiment(const std::string& s) {
  if (s == "local") return Experiment::Local;
  if (s == "global") return Experiment::Global;
  if (s == "limit") return Experiment::LimitOnly;
  if (s == "crosscheck") return Experiment::CrossCheck;
  throw InvalidArgument("experiment: expected local|global|limit|crosscheck, got '" + s + "'");
}

inline const char* to_string(EnvelopeVariant v) { return v == EnvelopeVariant::DC ? "dc" : "decaying"; }

inline EnvelopeVariant parse_variant(const std::string& s) {
  if (s == "decaying") return EnvelopeVariant::Decaying;
  if (s == "dc") return EnvelopeVariant::DC;
  throw InvalidArgument("variant: expected decaying|dc, got '" + s + "'");
}

struct ExperimentConfig {
  double alpha = 1.0;
  std::optional<double> e0;
  std::optional<Interval> window;  // energy window J
  double n = 2000.0;
  double h = 0.05;
  std::size_t m = 256;
  std::size_t trials = 100;
  std::uint64_t master_seed = 1;
  EnvelopeVariant variant = EnvelopeVariant::Decaying;
  Experiment experiment = Experiment::Local;
  // First trial index, so that runs over disjoint trial ranges can be merged.
  std::size_t first_trial = 0;

  Envelope envelope() const {
    return variant == EnvelopeVariant::DC ? Envelope::dc(alpha, n) : Envelope::decaying(alpha);
  }
};

// Rescaled-eigenvalue window of the local experiment.
inline constexpr Interval local_lambda_window{-10.0 * std::numbers::pi, 10.0 * std::numbers::pi};

inline void validate(const ExperimentConfig& c) {
  auto field = [](bool ok, const std::string& name, const std::string& why) {
    if (!ok) throw InvalidArgument(name + ": " + why);
  };
  field(std::isfinite(c.alpha) && c.alpha >= 0.0, "alpha", "must be finite and non-negative");
  field(c.variant == EnvelopeVariant::DC || c.alpha > 0.0, "alpha", "must be positive for the decaying envelope");
  field(std::isfinite(c.n) && c.n > 0.0, "n", "must be positive");
  field(std::isfinite(c.h) && c.h > 0.0 && c.h < c.n, "h", "must satisfy 0 < h < n");
  const double cells = c.n / c.h;
  field(std::abs(cells - std::round(cells)) <= 1e-6 * cells, "h", "must divide n");
  field(c.m >= 1, "m", "must be positive");
  if (c.e0) field(std::isfinite(*c.e0) && *c.e0 > 0.0, "e0", "must be positive");
  if (c.window) {
    field(c.window->lo > 0.0, "window", "needs a > 0");
    field(c.window->hi > c.window->lo && std::isfinite(c.window->hi), "window", "needs a < b");
  }
  switch (c.experiment) {
    case Experiment::Local:
    case Experiment::LimitOnly:
      field(c.e0.has_value(), "e0", "required for this experiment");
      break;
    case Experiment::Global:
      field(c.window.has_value(), "window", "required for the global experiment");
      field(c.m >= 32, "m", "global experiment needs at least 32 cells");
      break;
    case Experiment::CrossCheck:
      break;
  }
  if (c.experiment == Experiment::LimitOnly) field(c.m >= 32, "m", "limit experiment needs at least 32 cells");
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["alpha"] = c.alpha;
  j["e0"] = c.e0 ? nlohmann::json(*c.e0) : nlohmann::json(nullptr);
  j["window"] = c.window ? nlohmann::json::array({c.window->lo, c.window->hi}) : nlohmann::json(nullptr);
  j["n"] = c.n;
  j["h"] = c.h;
  j["m"] = c.m;
  j["trials"] = c.trials;
  j["master_seed"] = c.master_seed;
  j["variant"] = to_string(c.variant);
  j["experiment"] = to_string(c.experiment);
  j["first_trial"] = c.first_trial;
  return j;
}

// Keys present in `j` overwrite `base`; unknown keys are rejected.
inline ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {}) {
  if (!j.is_object()) throw InvalidArgument("config: expected a JSON object");
  static const std::set<std::string> known{"alpha", "e0",          "window",     "n",
                                           "h",     "m",           "trials",     "master_seed",
                                           "variant", "experiment", "first_trial"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw InvalidArgument("config: unknown key '" + key + "'");
  }
  auto number = [&](const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw InvalidArgument(std::string(key) + ": expected a number");
    return v.get<double>();
  };
  auto count = [&](const char* key) -> std::uint64_t {
    const auto& v = j.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw InvalidArgument(std::string(key) + ": expected a non-negative integer");
  };
  ExperimentConfig c = base;
  if (j.contains("alpha")) c.alpha = number("alpha");
  if (j.contains("e0")) c.e0 = j.at("e0").is_null() ? std::nullopt : std::optional<double>(number("e0"));
  if (j.contains("window")) {
    const auto& w = j.at("window");
    if (w.is_null()) {
      c.window.reset();
    } else {
      if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
        throw InvalidArgument("window: expected [a, b]");
      }
      c.window = Interval{w[0].get<double>(), w[1].get<double>()};
    }
  }
  if (j.contains("n")) c.n = number("n");
  if (j.contains("h")) c.h = number("h");
  if (j.contains("m")) c.m = count("m");
  if (j.contains("trials")) c.trials = count("trials");
  if (j.contains("master_seed")) c.master_seed = count("master_seed");
  if (j.contains("first_trial")) c.first_trial = count("first_trial");
  if (j.contains("variant")) {
    if (!j.at("variant").is_string()) throw InvalidArgument("variant: expected a string");
    c.variant = parse_variant(j.at("variant").get<std::string>());
  }
  if (j.contains("experiment")) {
    if (!j.at("experiment").is_string()) throw InvalidArgument("experiment: expected a string");
    c.experiment = parse_experiment(j.at("experiment").get<std::string>());
  }
  return c;
}

// DECAY_SPECTRA_SEED, when set, replaces master_seed.
inline void apply_seed_override(ExperimentConfig& c, const char* env = std::getenv("DECAY_SPECTRA_SEED")) {
  if (!env || !*env) return;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 0);
  if (errno != 0 || *end != '\0' || *env == '-') {
    throw InvalidArgument(std::string("DECAY_SPECTRA_SEED: not an unsigned integer: '") + env + "'");
  }
  c.master_seed = v;
}

// FNV-1a over the canonical config text, ignoring the trial range.
inline std::string config_hash(const ExperimentConfig& c) {
  nlohmann::json j = to_json(c);
  j.erase("trials");
  j.erase("first_trial");
  const std::string text = j.dump();
  std::uint64_t hsh = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    hsh ^= ch;
    hsh *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hsh));
  return buf;
}

}  // namespace decay_spectra
