#pragma once

// Eigenvector shape measures on (0, 1) and their geometry.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "errors.hpp"
#include "format.hpp"
#include "tridiagonal.hpp"

namespace decay_spectra {

// Probability density on (0, 1), piecewise constant on m equal cells.
class ShapeMeasure {
 public:
  ShapeMeasure() = default;

  // Normalizes `density` so that sum_i density_i / m = 1.
  static ShapeMeasure from_density(std::vector<double> density) {
    detail::require(!density.empty(), "ShapeMeasure: no cells");
    double total = 0.0;
    for (double d : density) {
      detail::require(d >= 0.0 && std::isfinite(d), "ShapeMeasure: density must be finite and non-negative");
      total += d;
    }
    if (!(total > 0.0)) throw NumericFailure("ShapeMeasure: zero total mass", 0.0);
    const double scale = static_cast<double>(density.size()) / total;
    for (double& d : density) d *= scale;
    ShapeMeasure mu;
    mu.density_ = std::move(density);
    return mu;
  }

  static ShapeMeasure uniform(std::size_t m) { return from_density(std::vector<double>(m, 1.0)); }

  static ShapeMeasure one_hot(std::size_t m, std::size_t cell) {
    detail::require(cell < m, "ShapeMeasure::one_hot: cell out of range");
    std::vector<double> d(m, 0.0);
    d[cell] = 1.0;
    return from_density(std::move(d));
  }

  std::size_t cells() const noexcept { return density_.size(); }
  std::span<const double> density() const noexcept { return density_; }
  double cell_center(std::size_t i) const noexcept {
    return (static_cast<double>(i) + 0.5) / static_cast<double>(cells());
  }

  // Mass of cells [0, i), i = 0..m.
  std::vector<double> cdf() const {
    std::vector<double> c(cells() + 1, 0.0);
    const double w = 1.0 / static_cast<double>(cells());
    for (std::size_t i = 0; i < cells(); ++i) c[i + 1] = c[i] + density_[i] * w;
    return c;
  }

  double total_mass() const {
    double s = 0.0;
    for (double d : density_) s += d;
    return s / static_cast<double>(cells());
  }

 private:
  std::vector<double> density_;
};

namespace detail {

// Cell averages over m equal cells of the piecewise-linear interpolant of
// samples y_k at nodes x_k = k / (K - 1).
inline std::vector<double> cell_averages(std::span<const double> y, std::size_t m) {
  require(y.size() >= 2, "cell_averages: need at least two nodes");
  require(m >= 1, "cell_averages: need at least one cell");
  const std::size_t segments = y.size() - 1;
  const double dx = 1.0 / static_cast<double>(segments);
  const double cw = 1.0 / static_cast<double>(m);
  std::vector<double> out(m, 0.0);
  for (std::size_t k = 0; k < segments; ++k) {
    const double x0 = static_cast<double>(k) * dx;
    const double x1 = static_cast<double>(k + 1) * dx;
    const double slope = (y[k + 1] - y[k]) / dx;
    auto cell = std::min<std::size_t>(m - 1, static_cast<std::size_t>(x0 / cw));
    double a = x0;
    while (a < x1) {
      const double edge = std::min(x1, static_cast<double>(cell + 1) * cw);
      const double b = cell + 1 == m ? x1 : edge;
      // Exact integral of the linear piece over [a, b].
      const double ya = y[k] + slope * (a - x0);
      const double yb = y[k] + slope * (b - x0);
      out[cell] += 0.5 * (ya + yb) * (b - a);
      a = b;
      if (cell + 1 < m) ++cell;
    }
  }
  for (double& v : out) v = std::max(0.0, v / cw);
  return out;
}

}  // namespace detail

// Density proportional to e^{2 r} from radius samples at uniform nodes over
// [0, 1] (first node t = 0, last node t = 1).
inline ShapeMeasure shape_from_radius(std::span<const double> rvalues, std::size_t m) {
  detail::require(rvalues.size() >= 2, "shape_from_radius: need at least two samples");
  const double rmax = *std::max_element(rvalues.begin(), rvalues.end());
  std::vector<double> w(rvalues.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(2.0 * (rvalues[i] - rmax));
  return ShapeMeasure::from_density(detail::cell_averages(w, m));
}

// Node samples of psi^2 + psi'^2 / E on the full grid (boundary nodes
// included, psi = 0 there); derivatives by centered differences with
// one-sided ends.
inline std::vector<double> eigenpair_density_nodes(const EigenPair& pair, double energy, double n) {
  const std::size_t interior = pair.vector.size();
  detail::require(interior >= 1, "eigenpair_density_nodes: empty vector");
  detail::require(energy > 0.0, "eigenpair_density_nodes: energy must be positive");
  const std::size_t nodes = interior + 2;
  const double h = n / static_cast<double>(nodes - 1);
  std::vector<double> psi(nodes, 0.0);
  std::copy(pair.vector.begin(), pair.vector.end(), psi.begin() + 1);
  std::vector<double> dens(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    double d;
    if (i == 0) d = (psi[1] - psi[0]) / h;
    else if (i + 1 == nodes) d = (psi[i] - psi[i - 1]) / h;
    else d = (psi[i + 1] - psi[i - 1]) / (2.0 * h);
    dens[i] = psi[i] * psi[i] + d * d / energy;
  }
  return dens;
}

inline ShapeMeasure shape_from_eigenpair(const EigenPair& pair, double energy, double n, std::size_t m) {
  detail::require(m >= 1 && m <= pair.vector.size() + 1, "shape_from_eigenpair: cell count exceeds grid");
  return ShapeMeasure::from_density(detail::cell_averages(eigenpair_density_nodes(pair, energy, n), m));
}

// Argmax of the density after a centered moving average over `window` cells
// (truncated at the ends); ties go to the smallest index. Returns a cell center.
inline double localization_center(const ShapeMeasure& mu, std::size_t window = 5) {
  const auto d = mu.density();
  const std::size_t m = d.size();
  const std::size_t half = window / 2;
  std::size_t best = 0;
  double best_value = -1.0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(m - 1, i + half);
    double s = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) s += d[j];
    const double avg = s / static_cast<double>(hi - lo + 1);
    if (avg > best_value) {
      best_value = avg;
      best = i;
    }
  }
  return mu.cell_center(best);
}

// sup over cell boundaries of |CDF_mu - CDF_nu|.
inline double cdf_distance(const ShapeMeasure& mu, const ShapeMeasure& nu) {
  detail::require(mu.cells() == nu.cells(), "cdf_distance: grid mismatch");
  const auto a = mu.density(), b = nu.density();
  const double w = 1.0 / static_cast<double>(mu.cells());
  double ca = 0.0, cb = 0.0, sup = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca += a[i] * w;
    cb += b[i] * w;
    sup = std::max(sup, std::abs(ca - cb));
  }
  return std::min(1.0, sup);
}

// mu((center - width/2, center + width/2) intersected with (0, 1)).
inline double concentration_mass(const ShapeMeasure& mu, double center, double width) {
  detail::require(width > 0.0 && width < 1.0, "concentration_mass: need 0 < width < 1");
  const double lo = std::max(0.0, center - 0.5 * width);
  const double hi = std::min(1.0, center + 0.5 * width);
  if (hi <= lo) return 0.0;
  const auto d = mu.density();
  const double w = 1.0 / static_cast<double>(d.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double a = std::max(lo, static_cast<double>(i) * w);
    const double b = std::min(hi, static_cast<double>(i + 1) * w);
    if (b > a) mass += d[i] * (b - a);
  }
  return mass;
}

enum class TailCoordinate { LogRatio, Linear };

// Least-squares slope of log density against |log(t/center)| or |t - center|
// over all cells with positive density.
inline double tail_exponent(const ShapeMeasure& mu, double center, TailCoordinate coordinate) {
  detail::require(center > 0.0 && center < 1.0, "tail_exponent: center must lie in (0, 1)");
  const auto d = mu.density();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] > std::numeric_limits<double>::min())) continue;
    const double t = mu.cell_center(i);
    const double x = coordinate == TailCoordinate::LogRatio ? std::abs(std::log(t / center))
                                                            : std::abs(t - center);
    const double y = std::log(d[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++used;
  }
  if (used < 10) throw InvalidArgument("tail_exponent: fewer than 10 usable cells");
  const double k = static_cast<double>(used);
  const double var = sxx - sx * sx / k;
  if (!(var > 0.0)) throw InvalidArgument("tail_exponent: degenerate design");
  return (sxy - sx * sy / k) / var;
}

// CSV rows "trial,cell,density".
inline void write_shape_rows(std::ostream& os, std::size_t trial, const ShapeMeasure& mu) {
  const auto d = mu.density();
  for (std::size_t i = 0; i < d.size(); ++i) os << trial << ',' << i << ',' << format_double(d[i]) << '\n';
}

}  // namespace decay_spectra
