#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <decay_spectra/potential.hpp>
#include <decay_spectra/random.hpp>
#include <decay_spectra/tridiagonal.hpp>

#include "oracles.hpp"

using namespace decay_spectra;

namespace {

SampledPotential random_potential(double n, double h, double alpha, std::uint64_t seed) {
  const auto path = sample_torus_path(n, h, seed);
  return sample_potential(path, Envelope::decaying(alpha), FourierFunction::cosine(), n);
}

double free_value(std::size_t k, std::size_t size, double h) {
  return 2.0 / (h * h) * (1.0 - std::cos(static_cast<double>(k) * std::numbers::pi / static_cast<double>(size + 1)));
}

}  // namespace

TEST(Discretize, FreeSmallCase) {
  const auto op = discretize(SampledPotential::zero(4.0, 1.0), 1.0);
  ASSERT_EQ(op.size(), 3u);
  for (double d : op.diagonal()) EXPECT_DOUBLE_EQ(d, 2.0);
  EXPECT_DOUBLE_EQ(op.offdiagonal(), -1.0);
}

TEST(Discretize, SizeAndDiagonal) {
  const auto pot = random_potential(50.0, 0.05, 0.5, 1);
  const auto op = discretize(pot, 0.05);
  EXPECT_EQ(op.size(), 999u);
  for (std::size_t i = 0; i < op.size(); ++i) EXPECT_DOUBLE_EQ(op.diagonal()[i], 800.0 + pot.values()[i + 1]);
}

TEST(Discretize, RejectsMismatch) {
  const auto pot = random_potential(50.0, 0.05, 0.5, 1);
  EXPECT_THROW(discretize(pot, 0.1), InvalidArgument);
  EXPECT_THROW(discretize(SampledPotential::zero(10.0, 0.3), 0.3), InvalidArgument);
}

TEST(Sturm, ThreeByThree) {
  const auto op = discretize(SampledPotential::zero(4.0, 1.0), 1.0);
  // Spectrum {2 - sqrt 2, 2, 2 + sqrt 2}.
  EXPECT_EQ(sturm_count(op, 2.0), 1u);
  EXPECT_EQ(sturm_count(op, 2.0 + 1e-12), 2u);
  EXPECT_EQ(sturm_count(op, 0.5), 0u);
  EXPECT_EQ(sturm_count(op, 0.6), 1u);
  EXPECT_EQ(sturm_count(op, 3.5), 3u);
  EXPECT_EQ(sturm_count(op, op.gershgorin_lower() - 1.0), 0u);
  EXPECT_EQ(sturm_count(op, op.gershgorin_upper() + 1.0), 3u);
}

TEST(Sturm, FreeCountBelowTwoOverHSquared) {
  // For odd N the middle eigenvalue sits at 2/h^2, so probe just off it.
  for (std::size_t cells : {10u, 11u, 40u, 41u}) {
    const double h = 0.5;
    const auto op = discretize(SampledPotential::zero(h * static_cast<double>(cells), h), h);
    const std::size_t n = op.size();
    for (double e : {2.0 / (h * h) - 1e-9, 2.0 / (h * h) + 1e-9}) {
      std::size_t direct = 0;
      for (std::size_t k = 1; k <= n; ++k) direct += free_value(k, n, h) < e ? 1 : 0;
      EXPECT_EQ(sturm_count(op, e), direct) << cells;
    }
  }
}

TEST(Eigenvalues, FreeClosedForm) {
  const double h = 0.05;
  const auto op = discretize(SampledPotential::zero(500.0, h), h);
  const auto ev = eigenvalues_in_window(op, 0.0, 0.5, 1e-3 * default_bisection_tol(op));
  ASSERT_EQ(ev.size(), sturm_count(op, 0.5));
  for (std::size_t k = 0; k < ev.size(); ++k) EXPECT_NEAR(ev[k], free_value(k + 1, op.size(), h), 1e-8);
  const auto coarse = eigenvalues_in_window(op, 0.0, 0.5, default_bisection_tol(op));
  for (std::size_t k = 0; k < coarse.size(); ++k) {
    EXPECT_NEAR(coarse[k], free_value(k + 1, op.size(), h), default_bisection_tol(op));
  }
}

TEST(Eigenvalues, MatchDenseJacobi) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const double h = 0.1;
    const auto op = discretize(random_potential(12.0 + 2.0 * static_cast<double>(seed), h, 0.5, seed), h);
    ASSERT_LE(op.size(), 200u);
    const auto dense = oracle::jacobi_eigenvalues(oracle::dense(op));
    const auto ev = eigenvalues_in_window(op, op.gershgorin_lower() - 1.0, op.gershgorin_upper() + 1.0,
                                          1e-4 * default_bisection_tol(op));
    ASSERT_EQ(ev.size(), dense.size());
    for (std::size_t i = 0; i < ev.size(); ++i) EXPECT_NEAR(ev[i], dense[i], 1e-8 * std::max(1.0, dense[i]));
  }
}

TEST(Eigenvalues, WindowCompletenessProperty) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  const double h = 0.05;
  const auto op = discretize(random_potential(200.0, h, 0.25, 4), h);
  for (int rep = 0; rep < 40; ++rep) {
    double lo = u(rng), hi = u(rng);
    if (lo > hi) std::swap(lo, hi);
    if (hi - lo < 1e-9) continue;
    const auto ev = eigenvalues_in_window(op, lo, hi, default_bisection_tol(op));
    EXPECT_EQ(ev.size(), sturm_count(op, hi) - sturm_count(op, lo));
    EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end()));
  }
  EXPECT_TRUE(eigenvalues_in_window(op, -50.0, -40.0, 1e-6).empty());
  EXPECT_EQ(eigenvalues_in_window(op, op.gershgorin_lower() - 1.0, op.gershgorin_upper() + 1.0, 1e-6).size(),
            op.size());
}

TEST(Eigenvalues, ShiftCovariance) {
  const double h = 0.05, c = 0.37;
  const auto pot = random_potential(100.0, h, 0.5, 8);
  const auto a = discretize(pot, h);
  const auto b = discretize(pot.shifted(c), h);
  const double tol = 1e-4 * default_bisection_tol(a);
  const auto ea = eigenvalues_in_window(a, 0.0, 1.0, tol);
  const auto eb = eigenvalues_in_window(b, c, 1.0 + c, tol);
  ASSERT_EQ(ea.size(), eb.size());
  for (std::size_t i = 0; i < ea.size(); ++i) EXPECT_NEAR(eb[i] - ea[i], c, 1e-10);
}

TEST(Eigenvalues, ByIndex) {
  const double h = 0.05;
  const auto op = discretize(random_potential(100.0, h, 0.5, 3), h);
  const auto ev = eigenvalues_in_window(op, 0.1, 0.6, default_bisection_tol(op));
  const std::size_t base = sturm_count(op, 0.1);
  for (std::size_t j = 0; j < ev.size(); ++j) {
    EXPECT_NEAR(eigenvalue_by_index(op, base + j, 0.1, 0.6, default_bisection_tol(op)), ev[j],
                default_bisection_tol(op));
  }
  EXPECT_THROW(eigenvalue_by_index(op, base + ev.size(), 0.1, 0.6, 1e-6), InvalidArgument);
}

TEST(Eigenvector, FreeSineProfiles) {
  const double h = 0.05;
  const auto op = discretize(SampledPotential::zero(100.0, h), h);
  const std::size_t n = op.size();
  for (std::size_t k = 1; k <= 6; ++k) {
    const auto p = eigenvector(op, free_value(k, n, h));
    double dot = 0.0, ss = 0.0, pp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = std::sin(static_cast<double>(k * (i + 1)) * std::numbers::pi / static_cast<double>(n + 1));
      dot += s * p.vector[i];
      ss += s * s;
      pp += p.vector[i] * p.vector[i];
    }
    EXPECT_GT(dot / std::sqrt(ss * pp), 1.0 - 1e-10);
    EXPECT_NEAR(h * pp, 1.0, 1e-12);
  }
}

TEST(Eigenvector, ResidualAndNormContract) {
  const double h = 0.05;
  const auto op = discretize(random_potential(400.0, h, 0.5, 12), h);
  const auto ev = eigenvalues_in_window(op, 0.05, 0.2, default_bisection_tol(op));
  const auto pairs = eigenvectors(op, ev);
  ASSERT_EQ(pairs.size(), ev.size());
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    double nn = 0.0;
    for (double v : pairs[j].vector) nn += v * v;
    EXPECT_NEAR(nn * h, 1.0, 1e-12);
    EXPECT_LE(pairs[j].residual, 1e-8 * op.norm_estimate());
    EXPECT_NEAR(pairs[j].energy, ev[j], default_bisection_tol(op));
    for (std::size_t k = 0; k < j; ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < op.size(); ++i) dot += pairs[j].vector[i] * pairs[k].vector[i];
      EXPECT_LT(std::abs(dot * h), 1e-6);
    }
  }
}

TEST(Eigenvector, DeterministicSign) {
  const double h = 0.05;
  const auto op = discretize(random_potential(100.0, h, 0.5, 2), h);
  const double e = eigenvalue_by_index(op, 5, op.gershgorin_lower(), 10.0, default_bisection_tol(op));
  const auto a = eigenvector(op, e, {}, 1);
  const auto b = eigenvector(op, e, {}, 2);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.vector.size(); ++i) diff = std::max(diff, std::abs(a.vector[i] - b.vector[i]));
  EXPECT_LT(diff, 1e-8);
}
