#pragma once

// Sample moments and Kolmogorov-Smirnov statistics.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "errors.hpp"

namespace decay_spectra {

inline double sample_mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Unbiased variance; 0 for fewer than two values.
inline double sample_variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double sample_sd(std::span<const double> x) { return std::sqrt(sample_variance(x)); }

inline double standard_error(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  return sample_sd(x) / std::sqrt(static_cast<double>(x.size()));
}

struct ShapeMoments {
  double skewness;
  double excess_kurtosis;
};

inline ShapeMoments sample_shape_moments(std::span<const double> x) {
  detail::require(x.size() >= 4, "sample_shape_moments: need at least four values");
  const double m = sample_mean(x);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  const double k = static_cast<double>(x.size());
  m2 /= k;
  m3 /= k;
  m4 /= k;
  return {m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

// sup |F_emp - F| for a continuous reference CDF.
inline double ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  detail::require(!x.empty(), "ks_one_sample: empty sample");
  std::sort(x.begin(), x.end());
  const double k = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / k - f, f - static_cast<double>(i) / k});
  }
  return d;
}

inline double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  detail::require(!a.empty() && !b.empty(), "two_sample_ks: empty input");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

struct LinearFit {
  double intercept;
  double slope;
};

inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  detail::require(x.size() == y.size() && x.size() >= 2, "least_squares: need matching samples");
  const double mx = sample_mean(x), my = sample_mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  detail::require(sxx > 0.0, "least_squares: degenerate design");
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

}  // namespace decay_spectra
