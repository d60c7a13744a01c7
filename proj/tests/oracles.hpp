#pragma once

// Reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <decay_spectra/potential.hpp>
#include <decay_spectra/tridiagonal.hpp>

namespace oracle {

// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-26) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

inline std::vector<std::vector<double>> dense(const decay_spectra::TridiagonalOperator& op) {
  const std::size_t n = op.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = op.diagonal()[i];
    if (i + 1 < n) a[i][i + 1] = a[i + 1][i] = op.offdiagonal();
  }
  return a;
}

// tau(E) = (1/4E) int_0^inf C(s) cos(2 sqrt(E) s) ds with the correlation
// C(s) = E[F(X_0) F(X_s)] = sum_k |c_k|^2 exp(-k^2 s / 2), by composite
// Simpson on [0, S] with exp(-S/2) below double precision.
inline double tau_correlation_quadrature(const decay_spectra::FourierFunction& f, double energy) {
  const double kappa = std::sqrt(energy);
  const double S = 90.0;
  const std::size_t steps = 400000;
  const double h = S / static_cast<double>(steps);
  auto corr = [&](double s) {
    double c = 0.0;
    for (const auto& [k, ck] : f.coefficients()) c += std::norm(ck) * std::exp(-0.5 * k * k * s);
    return c * std::cos(2.0 * kappa * s);
  };
  double sum = corr(0.0) + corr(S);
  for (std::size_t i = 1; i < steps; ++i) sum += (i % 2 ? 4.0 : 2.0) * corr(static_cast<double>(i) * h);
  return sum * h / 3.0 / (4.0 * energy);
}

// Composite Simpson for smooth integrands.
template <class F>
double simpson(F&& f, double a, double b, std::size_t steps) {
  if (steps % 2) ++steps;
  const double h = (b - a) / static_cast<double>(steps);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < steps; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + static_cast<double>(i) * h);
  return s * h / 3.0;
}

}  // namespace oracle
