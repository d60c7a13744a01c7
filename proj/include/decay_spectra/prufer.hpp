#pragma once

// Continuum Pruefer phase/radius for H psi = kappa^2 psi:
//   (psi, psi'/kappa) = e^{r} (sin theta, cos theta),
//   theta' = kappa - (V/kappa) sin^2 theta,   r' = (V / 2 kappa) sin 2 theta.
// Integrated on the potential grid with the trapezoidal rule (Heun's
// corrector solved to convergence by Newton), so the trace satisfies the
// trapezoidal-quadrature form of the integral equations exactly.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "errors.hpp"
#include "potential.hpp"

namespace decay_spectra {

struct PrueferTrace {
  double kappa = 0.0;
  std::vector<double> times;
  std::vector<double> theta;  // unwrapped, theta_0 from the boundary condition
  std::vector<double> logr;   // r_0 = 0

  double length() const { return times.back(); }
};

namespace detail {

inline double phase_rate(double kappa, double v, double theta) {
  const double s = std::sin(theta);
  return kappa - (v / kappa) * s * s;
}

inline double radius_rate(double kappa, double v, double theta) {
  return (v / (2.0 * kappa)) * std::sin(2.0 * theta);
}

// One trapezoidal step theta_{i+1} = theta_i + h/2 (f(theta_i, v0) + f(theta_{i+1}, v1)).
inline double trapezoid_phase_step(double kappa, double h, double theta, double f0, double v1) {
  double next = theta + h * f0;
  const double c = (v1 / kappa);
  for (int it = 0; it < 8; ++it) {
    const double s = std::sin(next);
    const double g = next - theta - 0.5 * h * (f0 + kappa - c * s * s);
    const double dg = 1.0 + 0.5 * h * c * std::sin(2.0 * next);
    const double delta = g / dg;
    next -= delta;
    if (std::abs(delta) <= 1e-15 * (1.0 + std::abs(next))) break;
  }
  return next;
}

inline std::size_t prufer_steps(const SampledPotential& pot) {
  const auto steps = static_cast<std::size_t>(std::llround(pot.length_n() / pot.step()));
  require(pot.values().size() >= steps + 1, "prufer: potential grid too short");
  return steps;
}

}  // namespace detail

inline PrueferTrace integrate_prufer(const SampledPotential& pot, double kappa, double theta0 = 0.0) {
  detail::require(kappa > 0.0, "integrate_prufer: kappa must be positive");
  const std::size_t steps = detail::prufer_steps(pot);
  const double h = pot.step();
  const auto v = pot.values();
  PrueferTrace tr;
  tr.kappa = kappa;
  tr.times.resize(steps + 1);
  tr.theta.resize(steps + 1);
  tr.logr.resize(steps + 1);
  tr.times[0] = 0.0;
  tr.theta[0] = theta0;
  tr.logr[0] = 0.0;
  double theta = theta0, r = 0.0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double f0 = detail::phase_rate(kappa, v[i], theta);
    const double next = detail::trapezoid_phase_step(kappa, h, theta, f0, v[i + 1]);
    r += 0.5 * h * (detail::radius_rate(kappa, v[i], theta) + detail::radius_rate(kappa, v[i + 1], next));
    theta = next;
    tr.times[i + 1] = static_cast<double>(i + 1) * h;
    tr.theta[i + 1] = theta;
    tr.logr[i + 1] = r;
  }
  return tr;
}

// theta_n(kappa) without storing the trace.
inline double terminal_phase(const SampledPotential& pot, double kappa, double theta0 = 0.0) {
  detail::require(kappa > 0.0, "terminal_phase: kappa must be positive");
  const std::size_t steps = detail::prufer_steps(pot);
  const double h = pot.step();
  const auto v = pot.values();
  double theta = theta0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double f0 = detail::phase_rate(kappa, v[i], theta);
    theta = detail::trapezoid_phase_step(kappa, h, theta, f0, v[i + 1]);
  }
  return theta;
}

// Number of Dirichlet eigenvalues below kappa^2: floor(theta_n / pi).
inline long oscillation_count(const PrueferTrace& trace) {
  return static_cast<long>(std::floor(trace.theta.back() / std::numbers::pi));
}

inline long oscillation_count(const SampledPotential& pot, double energy) {
  detail::require(energy > 0.0, "oscillation_count: energy must be positive");
  return static_cast<long>(std::floor(terminal_phase(pot, std::sqrt(energy)) / std::numbers::pi));
}

struct EnergyBracket {
  double lo;
  double hi;
};

// Solves theta_n(sqrt(E)) = j pi by bisection in kappa (theta_n is increasing).
inline double shooting_eigenvalue(const SampledPotential& pot, long j, EnergyBracket bracket) {
  detail::require(bracket.lo > 0.0 && bracket.lo < bracket.hi, "shooting_eigenvalue: need 0 < lo < hi");
  const double target = static_cast<double>(j) * std::numbers::pi;
  double klo = std::sqrt(bracket.lo), khi = std::sqrt(bracket.hi);
  const double plo = terminal_phase(pot, klo) - target;
  const double phi = terminal_phase(pot, khi) - target;
  if (!(plo <= 0.0 && phi >= 0.0)) {
    throw InvalidArgument("shooting_eigenvalue: bracket does not contain theta_n = j pi");
  }
  for (int it = 0; it < 200 && khi - klo > 4e-16 * khi; ++it) {
    const double mid = 0.5 * (klo + khi);
    if (terminal_phase(pot, mid) - target < 0.0) klo = mid; else khi = mid;
  }
  const double kappa = 0.5 * (klo + khi);
  return kappa * kappa;
}

// r~_t = r_{nt} - tau(kappa^2) int_0^n a(s)^2 ds at every trace node, indexed
// by rescaled time t_i = times_i / n in [0, 1].
inline std::vector<double> renormalize_radius(const PrueferTrace& trace, const FourierFunction& f,
                                              const Envelope& env) {
  const double n = trace.length();
  const double drift = f.is_zero() ? 0.0 : lyapunov_tau(f, trace.kappa * trace.kappa) *
                                               envelope_square_integral(env, n);
  std::vector<double> out(trace.logr.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = trace.logr[i] - drift;
  return out;
}

}  // namespace decay_spectra
