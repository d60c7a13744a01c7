#pragma once

// Decorated local point processes built from finite-box spectra, and the
// gap / counting statistics used to tell the clock, Sine_beta and Poisson
// regimes apart.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "errors.hpp"
#include "random.hpp"
#include "shape.hpp"
#include "stats.hpp"

namespace decay_spectra {

// Half-open interval [lo, hi).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return lo <= x && x < hi; }
};

struct DecoratedPointProcess {
  std::vector<double> points;
  std::vector<ShapeMeasure> marks;  // empty, or aligned with points
  Interval window;
  double theta_shift = 0.0;
};

inline double uniform_theta(std::uint64_t seed) {
  Rng rng(stream_seed(seed, Stream::Decoration));
  return std::numbers::pi * uniform01(rng);
}

// theta ~ unif[0, pi) for alpha > 1/2, else 0.
inline double decoration_theta(double alpha, std::uint64_t seed) {
  return alpha > 0.5 ? uniform_theta(seed) : 0.0;
}

// lambda = n (sqrt(E) - sqrt(E0)) + theta.
inline double rescale_energy(double energy, double e0, double n, double theta) {
  return n * (std::sqrt(energy) - std::sqrt(e0)) + theta;
}

inline double unscale_point(double lambda, double e0, double n, double theta) {
  const double k = (lambda - theta) / n + std::sqrt(e0);
  return k * k;
}

// Energies whose rescaled positions can fall in `window`; the lower end is
// clamped at 0 when the window reaches below lambda(0).
inline Interval preimage_window(double e0, double n, Interval window, double theta) {
  detail::require(e0 > 0.0, "preimage_window: E0 must be positive");
  detail::require(n > 0.0, "preimage_window: n must be positive");
  const double klo = (window.lo - theta) / n + std::sqrt(e0);
  const double khi = (window.hi - theta) / n + std::sqrt(e0);
  return {klo > 0.0 ? klo * klo : 0.0, khi > 0.0 ? khi * khi : 0.0};
}

// `marks` is empty or aligned with `eigenvalues` (sorted ascending).
inline DecoratedPointProcess local_process_with_theta(std::span<const double> eigenvalues,
                                                      std::span<const ShapeMeasure> marks, double e0, double n,
                                                      Interval window, double theta) {
  if (!(e0 > 0.0)) throw InvalidArgument("local_process: E0 must be positive");
  detail::require(marks.empty() || marks.size() == eigenvalues.size(), "local_process: marks misaligned");
  DecoratedPointProcess out;
  out.window = window;
  out.theta_shift = theta;
  for (std::size_t j = 0; j < eigenvalues.size(); ++j) {
    if (!(eigenvalues[j] >= 0.0)) continue;
    const double lambda = rescale_energy(eigenvalues[j], e0, n, theta);
    if (!window.contains(lambda)) continue;
    out.points.push_back(lambda);
    if (!marks.empty()) out.marks.push_back(marks[j]);
  }
  return out;
}

inline DecoratedPointProcess local_process(std::span<const double> eigenvalues,
                                           std::span<const ShapeMeasure> marks, double e0, double n,
                                           Interval window, double alpha, std::uint64_t seed) {
  if (!(e0 > 0.0)) throw InvalidArgument("local_process: E0 must be positive");
  return local_process_with_theta(eigenvalues, marks, e0, n, window, decoration_theta(alpha, seed));
}

struct GapStatistics {
  double mean = 0.0;
  double sd = 0.0;
  std::vector<double> gaps;  // sorted, i.e. the empirical gap CDF support

  double cdf(double x) const {
    const auto it = std::upper_bound(gaps.begin(), gaps.end(), x);
    return static_cast<double>(it - gaps.begin()) / static_cast<double>(gaps.size());
  }
};

inline std::vector<double> consecutive_gaps(std::span<const double> points) {
  std::vector<double> g;
  if (points.size() < 2) return g;
  g.reserve(points.size() - 1);
  for (std::size_t i = 1; i < points.size(); ++i) g.push_back(points[i] - points[i - 1]);
  return g;
}

inline GapStatistics gap_statistics(std::span<const double> points) {
  if (points.size() < 2) throw InvalidArgument("gap_statistics: need at least two points");
  GapStatistics s;
  s.gaps = consecutive_gaps(points);
  s.mean = sample_mean(s.gaps);
  s.sd = sample_sd(s.gaps);
  std::sort(s.gaps.begin(), s.gaps.end());
  return s;
}

struct CountingStatistics {
  double mean = 0.0;
  double variance = 0.0;
  double dispersion = 0.0;  // variance / mean, NaN when mean is 0
  std::vector<double> counts;
};

// Counts in consecutive disjoint subwindows [lo + k l, lo + (k+1) l).
inline std::vector<double> subwindow_counts(std::span<const double> points, Interval window,
                                            double subwindow_length, std::size_t num_subwindows) {
  detail::require(subwindow_length > 0.0 && num_subwindows >= 1, "subwindow_counts: empty subdivision");
  if (subwindow_length * static_cast<double>(num_subwindows) > window.length() * (1.0 + 1e-12)) {
    throw InvalidArgument("counting_statistics: window too short for the requested subwindows");
  }
  std::vector<double> counts(num_subwindows, 0.0);
  for (double x : points) {
    if (x < window.lo) continue;
    const double k = std::floor((x - window.lo) / subwindow_length);
    if (k >= 0.0 && k < static_cast<double>(num_subwindows)) counts[static_cast<std::size_t>(k)] += 1.0;
  }
  return counts;
}

inline CountingStatistics count_dispersion(std::vector<double> counts) {
  CountingStatistics s;
  s.mean = sample_mean(counts);
  s.variance = sample_variance(counts);
  s.dispersion = s.mean > 0.0 ? s.variance / s.mean : std::numeric_limits<double>::quiet_NaN();
  s.counts = std::move(counts);
  return s;
}

inline CountingStatistics counting_statistics(std::span<const double> points, Interval window,
                                              double subwindow_length, std::size_t num_subwindows) {
  return count_dispersion(subwindow_counts(points, window, subwindow_length, num_subwindows));
}

}  // namespace decay_spectra
