#pragma once

// Random potential a(t) F(X_t) on the torus R / 2piZ and the spectral
// functionals of F that control the eigenvalue statistics.
//
// Conventions: the torus carries the normalized measure dx / 2pi and X_t is
// the Brownian motion generated by L = (1/2) d^2/dx^2, so L e^{ikx} =
// -(k^2/2) e^{ikx}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <vector>

#include "errors.hpp"
#include "random.hpp"

namespace decay_spectra {

using Complex = std::complex<double>;

// Finite Fourier series f(x) = sum_k c_k e^{ikx}.
class FourierFunction {
 public:
  FourierFunction() = default;

  // Zero coefficients are dropped. When `real_valued` is set the conjugate
  // symmetry c_{-k} = conj(c_k) is checked.
  explicit FourierFunction(std::map<int, Complex> coefficients, bool real_valued = true)
      : real_valued_(real_valued) {
    for (const auto& [k, c] : coefficients) {
      if (c != Complex(0.0, 0.0)) coefficients_.emplace(k, c);
    }
    if (real_valued_) {
      for (const auto& [k, c] : coefficients_) {
        const Complex partner = coefficient(-k);
        if (std::abs(partner - std::conj(c)) > 1e-14 * (1.0 + std::abs(c))) {
          throw InvalidArgument("FourierFunction: real-valued flag requires c_{-k} = conj(c_k)");
        }
      }
    }
  }

  static FourierFunction cosine() { return FourierFunction({{-1, 0.5}, {1, 0.5}}); }

  // Real series from cosine/sine amplitudes: sum_k a_k cos(kx) + b_k sin(kx), k >= 1.
  static FourierFunction from_trig(std::span<const double> cos_amp, std::span<const double> sin_amp) {
    std::map<int, Complex> c;
    const std::size_t modes = std::max(cos_amp.size(), sin_amp.size());
    for (std::size_t i = 0; i < modes; ++i) {
      const double a = i < cos_amp.size() ? cos_amp[i] : 0.0;
      const double b = i < sin_amp.size() ? sin_amp[i] : 0.0;
      const int k = static_cast<int>(i) + 1;
      c[k] = Complex(a / 2.0, -b / 2.0);
      c[-k] = Complex(a / 2.0, b / 2.0);
    }
    return FourierFunction(std::move(c));
  }

  const std::map<int, Complex>& coefficients() const noexcept { return coefficients_; }
  bool real_valued() const noexcept { return real_valued_; }
  bool is_zero() const noexcept { return coefficients_.empty(); }
  bool mean_zero() const noexcept { return coefficient(0) == Complex(0.0, 0.0); }

  int max_frequency() const noexcept {
    int m = 0;
    for (const auto& [k, c] : coefficients_) m = std::max(m, std::abs(k));
    return m;
  }

  Complex coefficient(int k) const {
    const auto it = coefficients_.find(k);
    return it == coefficients_.end() ? Complex(0.0, 0.0) : it->second;
  }

  Complex operator()(double x) const {
    Complex sum(0.0, 0.0);
    for (const auto& [k, c] : coefficients_) sum += c * std::polar(1.0, k * x);
    return sum;
  }

  double real_value(double x) const {
    double sum = 0.0;
    for (const auto& [k, c] : coefficients_) {
      sum += c.real() * std::cos(k * x) - c.imag() * std::sin(k * x);
    }
    return sum;
  }

  // Upper bound on sup |f|.
  double sup_bound() const noexcept {
    double s = 0.0;
    for (const auto& [k, c] : coefficients_) s += std::abs(c);
    return s;
  }

 private:
  std::map<int, Complex> coefficients_;
  bool real_valued_ = true;
};

enum class EnvelopeVariant { Decaying, DC };

struct Envelope {
  double alpha = 0.5;
  EnvelopeVariant variant = EnvelopeVariant::Decaying;
  double dc_scale_n = 1.0;  // box size n, DC variant only

  static Envelope decaying(double alpha) {
    detail::require(alpha > 0.0, "Envelope: alpha must be positive");
    return {alpha, EnvelopeVariant::Decaying, 1.0};
  }

  // Constant coupling n^{-alpha}; alpha = 0 gives the unit envelope.
  static Envelope dc(double alpha, double n) {
    detail::require(alpha >= 0.0, "Envelope: alpha must be non-negative");
    detail::require(n > 0.0, "Envelope: DC scale n must be positive");
    return {alpha, EnvelopeVariant::DC, n};
  }
};

// a(t) = (1 + t^2)^{-alpha/2} (Decaying) or n^{-alpha} (DC).
inline double evaluate_envelope(const Envelope& env, double t) {
  detail::require(t >= 0.0, "evaluate_envelope: t must be non-negative");
  if (env.variant == EnvelopeVariant::DC) return std::pow(env.dc_scale_n, -env.alpha);
  return std::pow(1.0 + t * t, -0.5 * env.alpha);
}

// int_0^n a(s)^2 ds.
inline double envelope_square_integral(const Envelope& env, double n) {
  detail::require(n >= 0.0, "envelope_square_integral: n must be non-negative");
  if (env.variant == EnvelopeVariant::DC) return n * std::pow(env.dc_scale_n, -2.0 * env.alpha);
  if (std::abs(env.alpha - 0.5) < 1e-15) return std::asinh(n);
  if (std::abs(env.alpha - 1.0) < 1e-15) return std::atan(n);
  // Composite Simpson in u = log(1 + s); the integrand is smooth in u.
  const double umax = std::log1p(n);
  const int panels = 1 << 16;
  const double du = umax / panels;
  auto g = [&](double u) {
    const double s = std::expm1(u);
    return std::pow(1.0 + s * s, -env.alpha) * (1.0 + s);
  };
  double sum = g(0.0) + g(umax);
  for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * g(i * du);
  return sum * du / 3.0;
}

// Brownian path on the torus, sampled on a uniform time grid.
class TorusPath {
 public:
  TorusPath(double step, std::vector<double> positions, std::uint64_t seed = 0)
      : step_(step), positions_(std::move(positions)), seed_(seed) {
    detail::require(step_ > 0.0, "TorusPath: step must be positive");
    detail::require(positions_.size() >= 2, "TorusPath: at least two positions required");
  }

  double step() const noexcept { return step_; }
  std::span<const double> positions() const noexcept { return positions_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double total_time() const noexcept { return step_ * static_cast<double>(positions_.size() - 1); }

 private:
  double step_;
  std::vector<double> positions_;
  std::uint64_t seed_;
};

inline double wrap_torus(double x) {
  constexpr double period = 2.0 * std::numbers::pi;
  double y = std::fmod(x, period);
  if (y < 0.0) y += period;
  if (y >= period) y = 0.0;
  return y;
}

// X_0 = 0, ceil(total_time/step) + 1 grid points, increments N(0, step).
inline TorusPath sample_torus_path(double total_time, double step, std::uint64_t seed) {
  detail::require(total_time > 0.0, "sample_torus_path: total_time must be positive");
  detail::require(step > 0.0 && step <= total_time, "sample_torus_path: need 0 < step <= total_time");
  const auto steps = static_cast<std::size_t>(std::ceil(total_time / step - 1e-9));
  std::vector<double> x(steps + 1);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(step));
  x[0] = 0.0;
  for (std::size_t i = 1; i <= steps; ++i) x[i] = wrap_torus(x[i - 1] + normal(rng));
  return TorusPath(step, std::move(x), seed);
}

// V(t_i) = a(t_i) F(X_{t_i}) on the grid t_i = i * step.
class SampledPotential {
 public:
  SampledPotential(double step, std::vector<double> values, Envelope envelope, double length_n)
      : step_(step), values_(std::move(values)), envelope_(envelope), length_n_(length_n) {
    detail::require(step_ > 0.0 && length_n_ > 0.0, "SampledPotential: step and length must be positive");
    detail::require(static_cast<double>(values_.size()) * step_ >= length_n_ * (1.0 - 1e-12),
                    "SampledPotential: grid does not cover [0, n]");
  }

  // Zero potential on [0, n], for free-operator checks.
  static SampledPotential zero(double length_n, double step) {
    const auto count = static_cast<std::size_t>(std::llround(length_n / step)) + 1;
    return SampledPotential(step, std::vector<double>(count, 0.0), Envelope::dc(0.0, 1.0), length_n);
  }

  double step() const noexcept { return step_; }
  std::span<const double> values() const noexcept { return values_; }
  const Envelope& envelope() const noexcept { return envelope_; }
  double length_n() const noexcept { return length_n_; }

  // Potential with a constant added (shift covariance checks).
  SampledPotential shifted(double c) const {
    std::vector<double> v(values_);
    for (double& x : v) x += c;
    return SampledPotential(step_, std::move(v), envelope_, length_n_);
  }

 private:
  double step_;
  std::vector<double> values_;
  Envelope envelope_;
  double length_n_;
};

inline SampledPotential sample_potential(const TorusPath& path, const Envelope& env,
                                         const FourierFunction& f, double length_n) {
  detail::require(f.real_valued(), "sample_potential: F must be real-valued");
  detail::require(length_n > 0.0, "sample_potential: n must be positive");
  detail::require(path.total_time() >= length_n * (1.0 - 1e-12),
                  "sample_potential: path shorter than the box");
  const auto count = static_cast<std::size_t>(std::llround(length_n / path.step())) + 1;
  const auto pos = path.positions();
  std::vector<double> v(std::min(count, pos.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = static_cast<double>(i) * path.step();
    v[i] = f.is_zero() ? 0.0 : evaluate_envelope(env, t) * f.real_value(pos[i]);
  }
  return SampledPotential(path.step(), std::move(v), env, length_n);
}

namespace detail {

inline void require_resolvent_input(const FourierFunction& f, double kappa) {
  require(kappa > 0.0, "resolvent: kappa must be positive");
  require(f.mean_zero(), "resolvent: F must have zero mean (c_0 = 0)");
}

inline Complex resolvent_symbol(int k, double kappa) {
  return Complex(-0.5 * k * k, 2.0 * kappa);
}

}  // namespace detail

// g_kappa = (L + 2 i kappa)^{-1} F, coefficient-wise c_k / (-k^2/2 + 2 i kappa).
inline FourierFunction resolvent_function(const FourierFunction& f, double kappa) {
  detail::require_resolvent_input(f, kappa);
  std::map<int, Complex> g;
  for (const auto& [k, c] : f.coefficients()) g[k] = c / detail::resolvent_symbol(k, kappa);
  return FourierFunction(std::move(g), false);
}

// (L + 2 i kappa) g, the inverse of resolvent_function.
inline FourierFunction apply_shifted_generator(const FourierFunction& g, double kappa) {
  std::map<int, Complex> out;
  for (const auto& [k, c] : g.coefficients()) out[k] = c * detail::resolvent_symbol(k, kappa);
  return FourierFunction(std::move(out), false);
}

// <F g_kappa> = sum_k |c_k|^2 / (-k^2/2 + 2 i kappa); real part is negative for F != 0.
inline Complex pairing_mean(const FourierFunction& f, double kappa) {
  detail::require_resolvent_input(f, kappa);
  Complex sum(0.0, 0.0);
  for (const auto& [k, c] : f.coefficients()) sum += std::norm(c) / detail::resolvent_symbol(k, kappa);
  return sum;
}

// tau(E) = (1/8E) <|grad g_sqrt(E)|^2> = (1/8E) sum_k k^2 |c_k|^2 / (k^4/4 + 4E).
inline double lyapunov_tau(const FourierFunction& f, double energy) {
  detail::require(energy > 0.0, "lyapunov_tau: energy must be positive");
  detail::require(f.mean_zero(), "lyapunov_tau: F must have zero mean");
  double sum = 0.0;
  for (const auto& [k, c] : f.coefficients()) {
    const double k2 = static_cast<double>(k) * k;
    sum += k2 * std::norm(c) / (0.25 * k2 * k2 + 4.0 * energy);
  }
  return sum / (8.0 * energy);
}

}  // namespace decay_spectra
