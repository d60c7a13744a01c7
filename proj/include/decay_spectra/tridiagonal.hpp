#pragma once

// Dirichlet finite-difference discretization of -d^2/dt^2 + V on [0, n]:
// interior nodes t_i = i h, i = 1..N with N = round(n/h) - 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "errors.hpp"
#include "potential.hpp"
#include "random.hpp"

namespace decay_spectra {

class TridiagonalOperator {
 public:
  TridiagonalOperator(std::vector<double> diagonal, double offdiagonal, double h, double length_n)
      : diagonal_(std::move(diagonal)), offdiagonal_(offdiagonal), h_(h), length_n_(length_n) {
    detail::require(!diagonal_.empty(), "TridiagonalOperator: empty diagonal");
    detail::require(h_ > 0.0, "TridiagonalOperator: h must be positive");
  }

  std::span<const double> diagonal() const noexcept { return diagonal_; }
  double offdiagonal() const noexcept { return offdiagonal_; }
  double h() const noexcept { return h_; }
  std::size_t size() const noexcept { return diagonal_.size(); }
  double length_n() const noexcept { return length_n_; }

  // Infinity-norm bound, also a Gershgorin radius.
  double norm_estimate() const noexcept {
    double m = 0.0;
    for (double d : diagonal_) m = std::max(m, std::abs(d));
    return m + 2.0 * std::abs(offdiagonal_);
  }

  double gershgorin_lower() const noexcept {
    return *std::min_element(diagonal_.begin(), diagonal_.end()) - 2.0 * std::abs(offdiagonal_);
  }
  double gershgorin_upper() const noexcept {
    return *std::max_element(diagonal_.begin(), diagonal_.end()) + 2.0 * std::abs(offdiagonal_);
  }

  // y = T x
  void apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      double s = diagonal_[i] * x[i];
      if (i > 0) s += offdiagonal_ * x[i - 1];
      if (i + 1 < n) s += offdiagonal_ * x[i + 1];
      y[i] = s;
    }
  }

 private:
  std::vector<double> diagonal_;
  double offdiagonal_;
  double h_;
  double length_n_;
};

struct EigenPair {
  double energy = 0.0;
  std::vector<double> vector;  // interior nodes, h * sum psi_i^2 = 1
  double residual = 0.0;       // ||(T - energy) psi|| in the same weighted norm
};

inline TridiagonalOperator discretize(const SampledPotential& pot, double h) {
  detail::require(h > 0.0, "discretize: h must be positive");
  detail::require(std::abs(pot.step() - h) <= 1e-12 * h, "discretize: potential must be sampled at step h");
  const double cells = pot.length_n() / h;
  const double rounded = std::round(cells);
  detail::require(std::abs(cells - rounded) <= 1e-6 * std::max(1.0, rounded),
                  "discretize: h must divide n");
  detail::require(rounded >= 2.0, "discretize: need at least one interior node");
  const auto size = static_cast<std::size_t>(rounded) - 1;
  const auto v = pot.values();
  detail::require(v.size() >= size + 1, "discretize: potential grid too short");
  const double kinetic = 2.0 / (h * h);
  std::vector<double> diag(size);
  for (std::size_t i = 0; i < size; ++i) diag[i] = kinetic + v[i + 1];
  return TridiagonalOperator(std::move(diag), -1.0 / (h * h), h, rounded * h);
}

// Number of eigenvalues strictly below `energy` (negative pivots of the
// LDL^T factorization of T - energy). Zero pivots are replaced by +pivmin, so
// an eigenvalue equal to `energy` is not counted.
inline std::size_t sturm_count(const TridiagonalOperator& op, double energy) {
  const auto diag = op.diagonal();
  const double b2 = op.offdiagonal() * op.offdiagonal();
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, b2) * 4.0;
  std::size_t count = 0;
  double d = 0.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    d = (diag[i] - energy) - (i == 0 ? 0.0 : b2 / d);
    if (std::abs(d) < pivmin) d = pivmin;
    if (d < 0.0) ++count;
  }
  return count;
}

inline double default_bisection_tol(const TridiagonalOperator& op) {
  return 1e-10 * 2.0 / (op.h() * op.h());
}

// All eigenvalues in [lo, hi), each located by Sturm bisection to width < tol.
// Brackets are shared by recursive splitting, so the output size always equals
// sturm_count(hi) - sturm_count(lo).
inline std::vector<double> eigenvalues_in_window(const TridiagonalOperator& op, double lo, double hi,
                                                 double tol) {
  detail::require(lo < hi, "eigenvalues_in_window: need lo < hi");
  detail::require(tol > 0.0, "eigenvalues_in_window: tol must be positive");
  struct Bracket {
    double a, b;
    std::size_t ca, cb;
  };
  std::vector<double> out;
  std::vector<Bracket> stack{{lo, hi, sturm_count(op, lo), sturm_count(op, hi)}};
  while (!stack.empty()) {
    const Bracket br = stack.back();
    stack.pop_back();
    if (br.cb == br.ca) continue;
    const double mid = 0.5 * (br.a + br.b);
    if (br.b - br.a < tol || mid <= br.a || mid >= br.b) {
      out.insert(out.end(), br.cb - br.ca, mid);
      continue;
    }
    const std::size_t cm = sturm_count(op, mid);
    // Push the upper half first so the lower half is processed first.
    stack.push_back({mid, br.b, cm, br.cb});
    stack.push_back({br.a, mid, br.ca, cm});
  }
  std::sort(out.begin(), out.end());
  return out;
}

// The eigenvalue with global (0-based, ascending) index `index`, bracketed in [lo, hi).
inline double eigenvalue_by_index(const TridiagonalOperator& op, std::size_t index, double lo, double hi,
                                  double tol) {
  detail::require(sturm_count(op, lo) <= index && index < sturm_count(op, hi),
                  "eigenvalue_by_index: index not bracketed");
  while (hi - lo >= tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(op, mid) <= index) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace detail {

// LU factorization of T - shift with partial pivoting (row interchanges give U
// a second superdiagonal).
class ShiftedTridiagonalLU {
 public:
  ShiftedTridiagonalLU(const TridiagonalOperator& op, double shift) {
    const auto a = op.diagonal();
    const double b = op.offdiagonal();
    const std::size_t n = a.size();
    diag_.resize(n);
    up1_.assign(n, 0.0);
    up2_.assign(n, 0.0);
    mult_.assign(n, 0.0);
    swapped_.assign(n, false);
    const double tiny = std::numeric_limits<double>::epsilon() * op.norm_estimate();
    double d = a[0] - shift;
    double u1 = n > 1 ? b : 0.0;
    double u2 = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double next_upper = i + 2 < n ? b : 0.0;
      if (std::abs(d) >= std::abs(b)) {
        if (std::abs(d) < tiny) d = tiny;
        const double m = b / d;
        diag_[i] = d;
        up1_[i] = u1;
        up2_[i] = u2;
        mult_[i] = m;
        d = (a[i + 1] - shift) - m * u1;
        u1 = next_upper - m * u2;
        u2 = 0.0;
      } else {
        const double m = d / b;
        diag_[i] = b;
        up1_[i] = a[i + 1] - shift;
        up2_[i] = next_upper;
        mult_[i] = m;
        swapped_[i] = true;
        const double nd = u1 - m * (a[i + 1] - shift);
        const double nu1 = u2 - m * next_upper;
        d = nd;
        u1 = nu1;
        u2 = 0.0;
      }
    }
    if (std::abs(d) < tiny) d = d < 0.0 ? -tiny : tiny;
    diag_[n - 1] = d;
  }

  void solve(std::span<double> y) const {
    const std::size_t n = diag_.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (swapped_[i]) std::swap(y[i], y[i + 1]);
      y[i + 1] -= mult_[i] * y[i];
    }
    for (std::size_t k = n; k-- > 0;) {
      double s = y[k];
      if (k + 1 < n) s -= up1_[k] * y[k + 1];
      if (k + 2 < n) s -= up2_[k] * y[k + 2];
      y[k] = s / diag_[k];
    }
  }

 private:
  std::vector<double> diag_, up1_, up2_, mult_;
  std::vector<bool> swapped_;
};

inline double weighted_norm(std::span<const double> x, double h) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s * h);
}

}  // namespace detail

// Inverse iteration at `energy` from a seeded start vector. Vectors in
// `orthogonal_to` (same weighted normalization) are projected out each sweep,
// which separates numerically clustered eigenvalues.
inline EigenPair eigenvector(const TridiagonalOperator& op, double energy,
                             std::span<const std::vector<double>> orthogonal_to = {},
                             std::uint64_t seed = 0x5eed) {
  const std::size_t n = op.size();
  const double h = op.h();
  const double tnorm = op.norm_estimate();
  const double target = 1e-10 * tnorm;
  const detail::ShiftedTridiagonalLU lu(op, energy);

  std::vector<double> x(n), tx(n);
  Rng rng(splitmix64(seed ^ n));
  std::uniform_real_distribution<double> start(-1.0, 1.0);
  for (double& v : x) v = start(rng);

  auto project_and_normalize = [&](std::vector<double>& v) {
    for (const auto& q : orthogonal_to) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += v[i] * q[i];
      dot *= h;
      for (std::size_t i = 0; i < n; ++i) v[i] -= dot * q[i];
    }
    const double nrm = detail::weighted_norm(v, h);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) return false;
    for (double& c : v) c /= nrm;
    return true;
  };

  project_and_normalize(x);
  double residual = std::numeric_limits<double>::infinity();
  double rayleigh = energy;
  constexpr int max_sweeps = 30;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    lu.solve(x);
    if (!project_and_normalize(x)) break;
    op.apply(x, tx);
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) q += x[i] * tx[i];
    rayleigh = q * h;
    for (std::size_t i = 0; i < n; ++i) tx[i] -= rayleigh * x[i];
    residual = detail::weighted_norm(tx, h);
    if (sweep >= 1 && residual <= target) {
      // Deterministic sign: first non-negligible component positive.
      double peak = 0.0;
      for (double v : x) peak = std::max(peak, std::abs(v));
      for (double v : x) {
        if (std::abs(v) > 1e-3 * peak) {
          if (v < 0.0) for (double& c : x) c = -c;
          break;
        }
      }
      return {rayleigh, std::move(x), residual};
    }
  }
  throw NumericFailure("eigenvector: inverse iteration did not converge", residual);
}

// Eigenpairs for a sorted list of eigenvalues; each vector is orthogonalized
// against earlier vectors whose eigenvalues lie within `cluster_gap`.
inline std::vector<EigenPair> eigenvectors(const TridiagonalOperator& op, std::span<const double> energies,
                                           double cluster_gap = -1.0) {
  if (cluster_gap < 0.0) cluster_gap = 1e-6 * op.norm_estimate();
  std::vector<EigenPair> out;
  out.reserve(energies.size());
  std::vector<std::vector<double>> cluster;
  for (std::size_t k = 0; k < energies.size(); ++k) {
    if (k > 0 && energies[k] - energies[k - 1] > cluster_gap) cluster.clear();
    EigenPair pair = eigenvector(op, energies[k], cluster, 0x5eed + k);
    cluster.push_back(pair.vector);
    out.push_back(std::move(pair));
  }
  return out;
}

}  // namespace decay_spectra
