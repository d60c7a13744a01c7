#pragma once

// Standing oracle battery. Every check reports its value against a
// tolerance; failures become report entries, never exceptions.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "config.hpp"
#include "experiments.hpp"
#include "limits.hpp"
#include "potential.hpp"
#include "prufer.hpp"
#include "report.hpp"
#include "shape.hpp"
#include "tridiagonal.hpp"

namespace decay_spectra {

namespace detail {

// Solves the cyclic tridiagonal system with constant off-diagonal `b` and
// diagonal `d` (Sherman-Morrison on the corner entries).
inline std::vector<Complex> solve_cyclic(Complex d, Complex b, std::vector<Complex> rhs) {
  const std::size_t n = rhs.size();
  const Complex gamma = -d;
  std::vector<Complex> diag(n, d), u(n, 0.0);
  diag[0] = d - gamma;
  diag[n - 1] = d - b * b / gamma;
  u[0] = gamma;
  u[n - 1] = b;
  auto thomas = [&](std::vector<Complex> y) {
    std::vector<Complex> c(n), x(n);
    c[0] = b / diag[0];
    y[0] /= diag[0];
    for (std::size_t i = 1; i < n; ++i) {
      const Complex m = diag[i] - b * c[i - 1];
      c[i] = b / m;
      y[i] = (y[i] - b * y[i - 1]) / m;
    }
    x[n - 1] = y[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = y[i] - c[i] * x[i + 1];
    return x;
  };
  const auto x = thomas(std::move(rhs));
  const auto z = thomas(u);
  const Complex vx = x[0] + b / gamma * x[n - 1];
  const Complex vz = z[0] + b / gamma * z[n - 1];
  const Complex factor = vx / (1.0 + vz);
  std::vector<Complex> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - factor * z[i];
  return out;
}

// tau from its defining integral, (1/8E) <|g'|^2> with (L + 2 i kappa) g = F,
// discretized by finite differences on an M-point torus grid.
inline double tau_finite_difference(const FourierFunction& f, double energy, std::size_t points) {
  const double hx = 2.0 * std::numbers::pi / static_cast<double>(points);
  const double kappa = std::sqrt(energy);
  std::vector<Complex> rhs(points);
  for (std::size_t j = 0; j < points; ++j) rhs[j] = f.real_value(static_cast<double>(j) * hx);
  const Complex b = 0.5 / (hx * hx);
  const Complex d = Complex(-1.0 / (hx * hx), 2.0 * kappa);
  const auto g = solve_cyclic(d, b, std::move(rhs));
  double s = 0.0;
  for (std::size_t j = 0; j < points; ++j) s += std::norm(g[(j + 1) % points] - g[j]);
  return s / (static_cast<double>(points) * hx * hx) / (8.0 * energy);
}

// Two Richardson levels remove the h^2 and h^4 terms of the even expansion.
inline double tau_quadrature(const FourierFunction& f, double energy) {
  std::size_t m = 256;
  while (m < 64 * static_cast<std::size_t>(std::max(1, f.max_frequency()))) m *= 2;
  const double t1 = tau_finite_difference(f, energy, m);
  const double t2 = tau_finite_difference(f, energy, 2 * m);
  const double t4 = tau_finite_difference(f, energy, 4 * m);
  const double r1 = (4.0 * t2 - t1) / 3.0;
  const double r2 = (4.0 * t4 - t2) / 3.0;
  return (16.0 * r2 - r1) / 15.0;
}

inline FourierFunction random_fourier(std::size_t modes, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> a(modes), b(modes);
  for (std::size_t i = 0; i < modes; ++i) {
    a[i] = normal(rng);
    b[i] = normal(rng);
  }
  return FourierFunction::from_trig(a, b);
}

}  // namespace detail

// Largest |sturm - prufer| count difference over `energies`.
inline long sturm_prufer_discrepancy(const SampledPotential& pot, const TridiagonalOperator& op,
                                     std::span<const double> energies) {
  long worst = 0;
  for (double e : energies) {
    const long s = static_cast<long>(sturm_count(op, e));
    worst = std::max(worst, std::abs(s - oscillation_count(pot, e)));
  }
  return worst;
}

// Dirichlet FD eigenvalues of the free operator.
inline double free_eigenvalue(std::size_t k, std::size_t size, double h) {
  return 2.0 / (h * h) * (1.0 - std::cos(static_cast<double>(k) * std::numbers::pi / static_cast<double>(size + 1)));
}

// sup-CDF distance between the eigenpair shape of the FD eigenvalue with
// index `index` and the radius shape of the continuum shooting eigenvalue
// with the same index.
inline double eigenpair_radius_distance(const SampledPotential& pot, const TridiagonalOperator& op,
                                        std::size_t index, std::size_t m) {
  const double e_fd = eigenvalue_by_index(op, index, 0.0, op.gershgorin_upper() + 1.0, default_bisection_tol(op));
  const EigenPair pair = eigenvector(op, e_fd);
  const ShapeMeasure a = shape_from_eigenpair(pair, e_fd, pot.length_n(), m);
  double lo = 0.9 * e_fd, hi = 1.1 * e_fd + 1e-3;
  const long j = static_cast<long>(index) + 1;
  while (terminal_phase(pot, std::sqrt(lo)) > j * std::numbers::pi) lo *= 0.9;
  while (terminal_phase(pot, std::sqrt(hi)) < j * std::numbers::pi) hi *= 1.1;
  const double e_c = shooting_eigenvalue(pot, j, {lo, hi});
  const PrueferTrace tr = integrate_prufer(pot, std::sqrt(e_c));
  const ShapeMeasure b = shape_from_radius(tr.logr, m);
  return cdf_distance(a, b);
}

inline RunReport run_crosscheck(const ExperimentConfig& cfg, const RunOptions& = {}) {
  detail::require_experiment(cfg, Experiment::CrossCheck);
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  RunReport r;
  r.config = cfg;
  auto add = [&](std::string name, double value, double tol, bool passed) {
    r.checks.push_back({std::move(name), value, tol, passed});
  };
  auto guarded = [&](const std::string& name, double tol, const std::function<double()>& value) {
    try {
      const double v = value();
      add(name, v, tol, std::isfinite(v) && v <= tol);
    } catch (const std::exception&) {
      add(name, std::numeric_limits<double>::quiet_NaN(), tol, false);
    }
  };

  const std::uint64_t seed = trial_seed(cfg.master_seed, cfg.first_trial);
  const FourierFunction f = model_function();

  guarded("sturm_vs_prufer", 1.0, [&] {
    const SampledPotential pot = trial_potential(cfg, seed);
    const TridiagonalOperator op = discretize(pot, cfg.h);
    Rng rng(stream_seed(seed, Stream::Pick));
    std::vector<double> energies(20);
    for (double& e : energies) e = 0.005 + 3.995 * uniform01(rng);
    return static_cast<double>(sturm_prufer_discrepancy(pot, op, energies));
  });

  guarded("window_count_vs_bisection", 0.0, [&] {
    const SampledPotential pot = trial_potential(cfg, seed);
    const TridiagonalOperator op = discretize(pot, cfg.h);
    const double lo = 0.05, hi = 0.5;
    const auto ev = eigenvalues_in_window(op, lo, hi, default_bisection_tol(op));
    const double expected = static_cast<double>(sturm_count(op, hi) - sturm_count(op, lo));
    return std::abs(static_cast<double>(ev.size()) - expected);
  });

  // Absolute error, with bisection run well below the default tolerance.
  guarded("free_eigenvalues", 1e-8, [&] {
    const TridiagonalOperator op = discretize(SampledPotential::zero(cfg.n, cfg.h), cfg.h);
    const double tol = 1e-3 * default_bisection_tol(op);
    const std::size_t count = std::min<std::size_t>(20, op.size());
    const auto ev = eigenvalues_in_window(op, 0.0, 0.5 * (free_eigenvalue(count, op.size(), cfg.h) +
                                                          free_eigenvalue(count + 1, op.size(), cfg.h)),
                                          tol);
    if (ev.size() != count) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      const double exact = free_eigenvalue(k + 1, op.size(), cfg.h);
      worst = std::max(worst, std::abs(ev[k] - exact));
    }
    return worst;
  });

  guarded("free_eigenvectors", 1e-10, [&] {
    const TridiagonalOperator op = discretize(SampledPotential::zero(cfg.n, cfg.h), cfg.h);
    double worst = 0.0;
    for (std::size_t k = 1; k <= std::min<std::size_t>(5, op.size()); ++k) {
      const EigenPair p = eigenvector(op, free_eigenvalue(k, op.size(), cfg.h));
      double dot = 0.0, nn = 0.0;
      for (std::size_t i = 0; i < op.size(); ++i) {
        const double s = std::sin(static_cast<double>(k * (i + 1)) * std::numbers::pi / static_cast<double>(op.size() + 1));
        dot += s * p.vector[i];
        nn += s * s;
      }
      double pp = 0.0;
      for (double v : p.vector) pp += v * v;
      worst = std::max(worst, 1.0 - std::abs(dot) / std::sqrt(nn * pp));
    }
    return worst;
  });

  guarded("free_shape_uniform", 10.0 * cfg.h, [&] {
    const TridiagonalOperator op = discretize(SampledPotential::zero(cfg.n, cfg.h), cfg.h);
    const std::size_t k = std::min<std::size_t>(10, op.size());
    const double e = free_eigenvalue(k, op.size(), cfg.h);
    const EigenPair p = eigenvector(op, e);
    const std::size_t m = std::min(cfg.m, op.size() + 1);
    return cdf_distance(shape_from_eigenpair(p, e, cfg.n, m), ShapeMeasure::uniform(m));
  });

  guarded("eigenpair_vs_radius", 5.0 * cfg.h, [&] {
    const SampledPotential pot = trial_potential(cfg, seed);
    const TridiagonalOperator op = discretize(pot, cfg.h);
    const std::size_t index = sturm_count(op, 0.25);
    return eigenpair_radius_distance(pot, op, index, std::min(cfg.m, op.size() + 1));
  });

  guarded("tau_cosine_closed_form", 1e-10, [&] {
    double worst = 0.0;
    for (double e : {1.0 / 16.0, 0.25, 1.0, 4.0}) {
      const double exact = 1.0 / (4.0 * e * (1.0 + 16.0 * e));
      worst = std::max(worst, std::abs(lyapunov_tau(f, e) - exact) / exact);
    }
    return worst;
  });

  guarded("tau_quadrature_random_modes", 1e-8, [&] {
    const FourierFunction g = detail::random_fourier(8, stream_seed(seed, Stream::Limit));
    double worst = 0.0;
    for (double e : {0.05, 0.3, 2.0}) {
      const double sum = lyapunov_tau(g, e);
      worst = std::max(worst, std::abs(detail::tau_quadrature(g, e) - sum) / sum);
    }
    return worst;
  });

  guarded("rtilde_moments_z", 3.0, [&] {
    const double tau = lyapunov_tau(f, cfg.e0.value_or(1.0 / 16.0));
    const std::vector<double> grid{0.5, 1.0};
    std::vector<double> inc(4000);
    for (std::size_t i = 0; i < inc.size(); ++i) {
      const SdePath p = simulate_rtilde(tau, grid, trial_seed(seed, i));
      inc[i] = p.values[1] - p.values[0];
    }
    const double target = tau * std::log(2.0);
    const double zm = std::abs(sample_mean(inc) - target) / standard_error(inc);
    const double var = sample_variance(inc);
    const double zv = std::abs(var - target) / (target * std::sqrt(2.0 / static_cast<double>(inc.size() - 1)));
    return std::max(zm, zv);
  });

  aggregate(r);
  r.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  switch (cfg.experiment) {
    case Experiment::Local: return run_local_experiment(cfg, opt);
    case Experiment::Global: return run_global_experiment(cfg, opt);
    case Experiment::LimitOnly: return run_limit_experiment(cfg, opt);
    case Experiment::CrossCheck: return run_crosscheck(cfg, opt);
  }
  throw InvalidArgument("experiment: unknown");
}

}  // namespace decay_spectra
