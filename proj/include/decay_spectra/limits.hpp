#pragma once

// Samplers for the limiting objects: the renormalized radius SDE, the
// critical limit shape, Sine_beta through the phase SDE, clock and Poisson.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "errors.hpp"
#include "pointproc.hpp"
#include "random.hpp"
#include "shape.hpp"

namespace decay_spectra {

inline constexpr double default_t_min = 1e-4;

struct SdePath {
  std::vector<double> times;
  std::vector<double> values;
  std::uint64_t seed = 0;
  double tau = 0.0;
};

// `points` nodes log-spaced on [t_min, 1].
inline std::vector<double> log_time_grid(double t_min, std::size_t points) {
  detail::require(t_min > 0.0 && t_min < 1.0, "log_time_grid: need 0 < t_min < 1");
  detail::require(points >= 2, "log_time_grid: need at least two nodes");
  std::vector<double> t(points);
  const double a = std::log(t_min);
  for (std::size_t i = 0; i < points; ++i) {
    t[i] = std::exp(a * (1.0 - static_cast<double>(i) / static_cast<double>(points - 1)));
  }
  t.front() = t_min;
  t.back() = 1.0;
  return t;
}

// r~ on an increasing grid in (0, 1], started at 0. In v = tau log t the
// equation is dr = dv + dB_v, so every increment is sampled exactly.
inline SdePath simulate_rtilde(double tau, std::span<const double> t_grid, std::uint64_t seed) {
  detail::require(tau >= 0.0, "simulate_rtilde: tau must be non-negative");
  detail::require(!t_grid.empty(), "simulate_rtilde: empty grid");
  if (!(t_grid.front() > 0.0)) throw InvalidArgument("simulate_rtilde: t_min must be positive");
  SdePath path;
  path.times.assign(t_grid.begin(), t_grid.end());
  path.values.assign(t_grid.size(), 0.0);
  path.seed = seed;
  path.tau = tau;
  Rng rng(stream_seed(seed, Stream::Path));
  std::normal_distribution<double> normal;
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    detail::require(t_grid[i] > t_grid[i - 1], "simulate_rtilde: grid must be increasing");
    const double dv = tau * std::log(t_grid[i] / t_grid[i - 1]);
    path.values[i] = path.values[i - 1] + dv + std::sqrt(dv) * normal(rng);
  }
  return path;
}

enum class ShapeVariant { LogRatio, Linear };

struct LimitShapeSample {
  ShapeMeasure shape;
  double u = 0.0;
  // log of the normalized density at t = u, so log(density_i) minus this is
  // the sampled log-density relative to its value at u.
  double log_density_at_u = 0.0;
  // (t_0 / u)^{2 tau} for the lowest cell edge t_0; LogRatio only.
  double truncated_mass_estimate = 0.0;
};

// Density exp(2 Z_v - 2|v|) at the cell centers t_i, v = tau log(t_i/U)
// (LogRatio) or tau (t_i - U) (Linear). Z is a two-sided Brownian motion
// with Z_0 = 0 and independent sides.
inline LimitShapeSample sample_limit_shape_critical(double tau, std::size_t m, ShapeVariant variant,
                                                    std::uint64_t seed) {
  detail::require(tau > 0.0, "sample_limit_shape_critical: tau must be positive");
  detail::require(m >= 32, "sample_limit_shape_critical: need m >= 32");
  Rng rng(stream_seed(seed, Stream::Limit));
  std::normal_distribution<double> normal;
  LimitShapeSample out;
  double u = uniform01(rng);
  while (u <= 0.0) u = uniform01(rng);
  out.u = u;

  std::vector<double> v(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
    v[i] = variant == ShapeVariant::LogRatio ? tau * std::log(t / u) : tau * (t - u);
  }
  // v is increasing in i; walk outward from 0 on each side.
  const auto split = static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), 0.0) - v.begin());
  std::vector<double> z(m, 0.0);
  double zpos = 0.0, vprev = 0.0;
  for (std::size_t i = split; i < m; ++i) {
    zpos += std::sqrt(v[i] - vprev) * normal(rng);
    vprev = v[i];
    z[i] = zpos;
  }
  double zneg = 0.0;
  vprev = 0.0;
  for (std::size_t i = split; i-- > 0;) {
    zneg += std::sqrt(vprev - v[i]) * normal(rng);
    vprev = v[i];
    z[i] = zneg;
  }

  std::vector<double> ell(m);
  for (std::size_t i = 0; i < m; ++i) ell[i] = 2.0 * z[i] - 2.0 * std::abs(v[i]);
  const double top = *std::max_element(ell.begin(), ell.end());
  std::vector<double> dens(m);
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    dens[i] = std::exp(ell[i] - top);
    sum += dens[i];
  }
  out.log_density_at_u = -top - std::log(sum / static_cast<double>(m));
  out.shape = ShapeMeasure::from_density(std::move(dens));
  if (variant == ShapeVariant::LogRatio) {
    out.truncated_mass_estimate = std::pow(0.5 / (static_cast<double>(m) * u), 2.0 * tau);
  }
  return out;
}

struct ThetaFamily {
  std::vector<double> lambda_grid;
  std::vector<double> theta_at_1;
  double uniform_u = 0.0;
  std::uint64_t seed = 0;
};

struct ThetaOptions {
  double t_min = default_t_min;
  double ds = -1.0;  // log-time step; negative selects min(1e-3, 0.1 / tau)
};

namespace detail {

// Lifted phases of w = (cos Theta, sin Theta): Theta = k pi + angle(w) mod pi,
// with k the net anticlockwise crossings of the horizontal axis.
struct PhaseBundle {
  std::vector<double> w1, w2;
  std::vector<long> k;

  explicit PhaseBundle(std::span<const double> theta0) : w1(theta0.size()), w2(theta0.size()), k(theta0.size()) {
    for (std::size_t i = 0; i < theta0.size(); ++i) {
      const double kk = std::floor(theta0[i] / std::numbers::pi);
      k[i] = static_cast<long>(kk);
      const double a = theta0[i] - kk * std::numbers::pi;
      w1[i] = std::cos(a);
      w2[i] = std::sin(a);
    }
  }

  static bool upper(double x, double y) { return y > 0.0 || (y == 0.0 && x > 0.0); }

  void assign(std::size_t i, double x, double y) {
    const bool was = upper(w1[i], w2[i]);
    const bool now = upper(x, y);
    if (was != now) k[i] += (now == (x > 0.0)) ? 1 : -1;
    w1[i] = x;
    w2[i] = y;
  }

  void renormalize() {
    for (std::size_t i = 0; i < w1.size(); ++i) {
      const double s = std::max(std::abs(w1[i]), std::abs(w2[i]));
      w1[i] /= s;
      w2[i] /= s;
    }
  }

  double theta(std::size_t i) const {
    double a = std::atan2(w2[i], w1[i]);
    if (!upper(w1[i], w2[i])) a += std::numbers::pi;
    if (a >= std::numbers::pi) a -= std::numbers::pi;
    if (a < 0.0) a = 0.0;
    return static_cast<double>(k[i]) * std::numbers::pi + a;
  }
};

// Noise map for one log-time step with increments (xi1, xi2) over ds:
// exp([[-C, 2 sqrt(tau) xi1], [0, C]]), C = -sqrt(tau) xi2 - tau ds.
struct NoiseMap {
  double a11, a12, a22, bound;
};

inline NoiseMap noise_map(double tau, double xi1, double xi2, double ds) {
  const double st = std::sqrt(tau);
  const double c = -st * xi2 - tau * ds;
  const double b = 2.0 * st * xi1;
  const double shc = std::abs(c) < 1e-8 ? 1.0 + c * c / 6.0 : std::sinh(c) / c;
  return {std::exp(-c), b * shc, std::exp(c), st * std::abs(xi1) + std::sqrt(tau * xi1 * xi1 + c * c)};
}

}  // namespace detail

// Theta_1(lambda) for every lambda in `lambda_grid` (ascending), driven by
// one shared complex Brownian motion:
//   dTheta = lambda dt + sqrt(tau) Re[(e^{2 i Theta} - 1) dZ_t / sqrt(t)],
// Theta_{t_min} = lambda t_min. Each step applies the shared noise map (the
// Stratonovich form in s = log t) then the rotation by lambda dt, both order
// preserving, so Theta_1 is monotone in lambda pathwise.
inline ThetaFamily sample_theta_family(double tau, std::span<const double> lambda_grid, std::uint64_t seed,
                                       ThetaOptions opt = {}) {
  detail::require(tau >= 0.0, "sample_theta_family: tau must be non-negative");
  if (!(opt.t_min > 0.0 && opt.t_min < 1.0)) throw InvalidArgument("sample_theta_family: need 0 < t_min < 1");
  detail::require(!lambda_grid.empty(), "sample_theta_family: empty lambda grid");
  for (std::size_t i = 1; i < lambda_grid.size(); ++i) {
    detail::require(lambda_grid[i] > lambda_grid[i - 1], "sample_theta_family: lambda grid must increase");
  }
  const double ds_target = opt.ds > 0.0 ? opt.ds : (tau > 0.0 ? std::min(1e-3, 0.1 / tau) : 1e-3);
  constexpr double max_angle = 0.5;

  ThetaFamily fam;
  fam.lambda_grid.assign(lambda_grid.begin(), lambda_grid.end());
  fam.seed = seed;
  Rng rng(stream_seed(seed, Stream::Path));
  std::normal_distribution<double> normal;
  {
    Rng urng(stream_seed(seed, Stream::Decoration));
    fam.uniform_u = std::numbers::pi * uniform01(urng);
  }

  const std::size_t L = lambda_grid.size();
  std::vector<double> theta0(L);
  for (std::size_t i = 0; i < L; ++i) theta0[i] = lambda_grid[i] * opt.t_min;
  detail::PhaseBundle ph(theta0);
  // Rotation cos/sin per lambda for dt / 2^depth, rebuilt lazily per block.
  std::vector<std::vector<double>> rc, rs;
  std::vector<char> fresh;
  double block_dt = 0.0;
  auto rotation = [&](int depth) {
    const auto d = static_cast<std::size_t>(depth);
    if (d >= rc.size()) {
      rc.resize(d + 1, std::vector<double>(L));
      rs.resize(d + 1, std::vector<double>(L));
      fresh.resize(d + 1, 0);
    }
    if (!fresh[d]) {
      const double dt = std::ldexp(block_dt, -depth);
      for (std::size_t i = 0; i < L; ++i) {
        rc[d][i] = std::cos(lambda_grid[i] * dt);
        rs[d][i] = std::sin(lambda_grid[i] * dt);
      }
      fresh[d] = 1;
    }
  };

  auto advance = [&](const detail::NoiseMap& nm, int depth) {
    rotation(depth);
    const auto& cs = rc[static_cast<std::size_t>(depth)];
    const auto& sn = rs[static_cast<std::size_t>(depth)];
    for (std::size_t i = 0; i < L; ++i) {
      double x = nm.a11 * ph.w1[i] + nm.a12 * ph.w2[i];
      double y = nm.a22 * ph.w2[i];
      // The noise map alone moves the angle by less than max_angle.
      ph.assign(i, x, y);
      const double c = cs[i], s = sn[i];
      x = ph.w1[i];
      y = ph.w2[i];
      ph.assign(i, c * x - s * y, s * x + c * y);
    }
  };

  // Recursive Brownian-bridge refinement of one step [t, t + dt].
  struct Pending {
    double t, dt, xi1, xi2;
    int depth;
  };
  std::vector<Pending> work;
  const double lam_max = std::max(std::abs(lambda_grid.front()), std::abs(lambda_grid.back()));

  double t = opt.t_min;
  std::size_t step_counter = 0;
  while (t < 1.0 - 1e-15) {
    const double t_end = std::min(1.0, 2.0 * t);
    const auto steps = static_cast<std::size_t>(std::ceil((t_end - t) / (t * ds_target) - 1e-9));
    const double dt = (t_end - t) / static_cast<double>(std::max<std::size_t>(1, steps));
    detail::require(lam_max * dt < max_angle, "sample_theta_family: lambda window too wide for the step");
    block_dt = dt;
    std::fill(fresh.begin(), fresh.end(), 0);
    for (std::size_t j = 0; j < std::max<std::size_t>(1, steps); ++j) {
      const double t0 = t + static_cast<double>(j) * dt;
      const double ds = std::log1p(dt / t0);
      const double sd = std::sqrt(ds);
      const double xi1 = sd * normal(rng), xi2 = sd * normal(rng);
      work.push_back({t0, dt, xi1, xi2, 0});
      while (!work.empty()) {
        const Pending p = work.back();
        work.pop_back();
        const double pds = std::log1p(p.dt / p.t);
        const detail::NoiseMap nm = detail::noise_map(tau, p.xi1, p.xi2, pds);
        if (nm.bound < max_angle || p.depth >= 40) {
          advance(nm, p.depth);
          continue;
        }
        const double half = 0.5 * p.dt;
        const double ds_a = std::log1p(half / p.t);
        const double ds_b = pds - ds_a;
        const double bsd = std::sqrt(ds_a * ds_b / pds);
        const double a1 = p.xi1 * ds_a / pds + bsd * normal(rng);
        const double a2 = p.xi2 * ds_a / pds + bsd * normal(rng);
        work.push_back({p.t + half, half, p.xi1 - a1, p.xi2 - a2, p.depth + 1});
        work.push_back({p.t, half, a1, a2, p.depth + 1});
      }
      if (++step_counter % 32 == 0) ph.renormalize();
    }
    t = t_end;
  }

  fam.theta_at_1.resize(L);
  for (std::size_t i = 0; i < L; ++i) fam.theta_at_1[i] = ph.theta(i);
  for (std::size_t i = 1; i < L; ++i) {
    if (fam.theta_at_1[i] < fam.theta_at_1[i - 1]) {
      throw NumericFailure("sample_theta_family: Theta_1 not monotone in lambda; refine the step",
                           fam.theta_at_1[i - 1] - fam.theta_at_1[i]);
    }
  }
  return fam;
}

// Points lambda with Theta_1(lambda) in pi Z + U, located by linear
// interpolation between grid nodes (exact counts by monotonicity).
inline std::vector<double> theta_family_points(const ThetaFamily& fam) {
  std::vector<double> pts;
  const auto& lam = fam.lambda_grid;
  const auto& th = fam.theta_at_1;
  const double pi = std::numbers::pi;
  for (std::size_t i = 0; i + 1 < lam.size(); ++i) {
    const double lo = std::floor((th[i] - fam.uniform_u) / pi);
    const double hi = std::floor((th[i + 1] - fam.uniform_u) / pi);
    for (double j = lo + 1.0; j <= hi; j += 1.0) {
      const double level = j * pi + fam.uniform_u;
      const double frac = (level - th[i]) / (th[i + 1] - th[i]);
      pts.push_back(lam[i] + frac * (lam[i + 1] - lam[i]));
    }
  }
  return pts;
}

inline std::vector<double> sine_beta_lambda_grid(Interval window, std::size_t lambda_cells) {
  detail::require(window.hi > window.lo, "sine_beta: empty window");
  detail::require(lambda_cells >= 1, "sine_beta: need at least one lambda cell");
  std::vector<double> grid(lambda_cells + 1);
  for (std::size_t i = 0; i <= lambda_cells; ++i) {
    grid[i] = window.lo + window.length() * static_cast<double>(i) / static_cast<double>(lambda_cells);
  }
  return grid;
}

// Sine_beta (beta = 1/tau) points in `window`.
inline std::vector<double> sample_sine_beta(double tau, Interval window, double t_min, std::size_t lambda_cells,
                                            std::uint64_t seed) {
  ThetaOptions opt;
  opt.t_min = t_min;
  const ThetaFamily fam = sample_theta_family(tau, sine_beta_lambda_grid(window, lambda_cells), seed, opt);
  std::vector<double> pts = theta_family_points(fam);
  std::erase_if(pts, [&](double x) { return !window.contains(x); });
  return pts;
}

// Points n pi + theta in the window; theta ~ unif[0, pi) from `seed` when unset.
inline std::vector<double> sample_clock(std::optional<double> theta, Interval window, std::uint64_t seed = 0) {
  double th;
  if (theta) {
    th = *theta;
    detail::require(th >= 0.0 && th < std::numbers::pi, "sample_clock: theta must lie in [0, pi)");
  } else {
    Rng rng(stream_seed(seed, Stream::Decoration));
    th = std::numbers::pi * uniform01(rng);
  }
  std::vector<double> pts;
  if (!(window.hi > window.lo)) return pts;
  for (double j = std::ceil((window.lo - th) / std::numbers::pi); ; j += 1.0) {
    const double x = j * std::numbers::pi + th;
    if (x >= window.hi) break;
    if (x >= window.lo) pts.push_back(x);
  }
  return pts;
}

// Poisson process of intensity 1/pi on the window.
inline std::vector<double> sample_poisson_process(Interval window, std::uint64_t seed) {
  std::vector<double> pts;
  if (!(window.hi > window.lo)) return pts;
  detail::require(std::isfinite(window.lo) && std::isfinite(window.hi), "sample_poisson_process: finite window");
  Rng rng(stream_seed(seed, Stream::Path));
  std::poisson_distribution<long> count(window.length() / std::numbers::pi);
  const long k = count(rng);
  pts.reserve(static_cast<std::size_t>(k));
  for (long i = 0; i < k; ++i) pts.push_back(window.lo + window.length() * uniform01(rng));
  std::sort(pts.begin(), pts.end());
  return pts;
}

}  // namespace decay_spectra
