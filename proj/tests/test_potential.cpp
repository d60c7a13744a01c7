#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <decay_spectra/potential.hpp>
#include <decay_spectra/random.hpp>
#include <decay_spectra/stats.hpp>

#include "oracles.hpp"

using namespace decay_spectra;

namespace {

FourierFunction random_modes(std::size_t modes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> a(modes), b(modes);
  for (std::size_t i = 0; i < modes; ++i) {
    a[i] = normal(rng);
    b[i] = normal(rng);
  }
  return FourierFunction::from_trig(a, b);
}

}  // namespace

TEST(Tau, CosineClosedForm) {
  const auto f = FourierFunction::cosine();
  for (double e : {1.0 / 16.0, 0.25, 1.0, 4.0}) {
    const double exact = 1.0 / (4.0 * e * (1.0 + 16.0 * e));
    EXPECT_NEAR(lyapunov_tau(f, e), exact, 1e-10 * exact) << e;
  }
  EXPECT_DOUBLE_EQ(lyapunov_tau(f, 1.0 / 16.0), 2.0);
  EXPECT_NEAR(lyapunov_tau(f, 1.0), 1.0 / 68.0, 1e-15);
}

TEST(Tau, MatchesCorrelationQuadrature) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto f = random_modes(1 + s % 8, 100 + s);
    const double e = 0.05 + 0.3 * static_cast<double>(s);
    const double sum = lyapunov_tau(f, e);
    EXPECT_NEAR(oracle::tau_correlation_quadrature(f, e), sum, 1e-8 * sum) << "seed " << s;
  }
}

TEST(Tau, PairingIdentity) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto f = random_modes(5, s);
    for (double kappa : {0.2, 0.7, 1.9}) {
      const double lhs = lyapunov_tau(f, kappa * kappa);
      const double rhs = -pairing_mean(f, kappa).real() / (4.0 * kappa * kappa);
      EXPECT_NEAR(lhs, rhs, 1e-12 * lhs);
    }
  }
}

TEST(Tau, MonotoneDecreasingInEnergy) {
  const auto f = random_modes(6, 9);
  double prev = lyapunov_tau(f, 0.01);
  for (double e = 0.02; e < 5.0; e *= 1.3) {
    const double t = lyapunov_tau(f, e);
    EXPECT_LT(t, prev);
    prev = t;
  }
}

TEST(Tau, RejectsBadInput) {
  EXPECT_THROW(lyapunov_tau(FourierFunction::cosine(), 0.0), InvalidArgument);
  EXPECT_THROW(lyapunov_tau(FourierFunction::cosine(), -1.0), InvalidArgument);
  const FourierFunction with_mean({{0, 1.0}, {1, 0.5}, {-1, 0.5}});
  EXPECT_THROW(lyapunov_tau(with_mean, 1.0), InvalidArgument);
}

TEST(Resolvent, InvertsShiftedGenerator) {
  const auto f = random_modes(4, 3);
  const double kappa = 0.6;
  const auto back = apply_shifted_generator(resolvent_function(f, kappa), kappa);
  for (const auto& [k, c] : f.coefficients()) {
    EXPECT_NEAR(std::abs(back.coefficient(k) - c), 0.0, 1e-14);
  }
}

TEST(Resolvent, CosineCoefficients) {
  const auto g = resolvent_function(FourierFunction::cosine(), 0.25);
  const Complex expected = 0.5 / Complex(-0.5, 0.5);
  EXPECT_NEAR(std::abs(g.coefficient(1) - expected), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(g.coefficient(-1) - expected), 0.0, 1e-15);
}

TEST(FourierFunction, ConjugateSymmetryEnforced) {
  EXPECT_THROW(FourierFunction({{1, Complex(0.5, 0.0)}}), InvalidArgument);
  EXPECT_NO_THROW(FourierFunction({{1, Complex(0.5, 0.0)}}, false));
  const auto f = FourierFunction::from_trig(std::vector<double>{0.0, 2.0}, std::vector<double>{1.0});
  for (double x : {0.0, 0.3, 2.0, 5.5}) {
    EXPECT_NEAR(f.real_value(x), 2.0 * std::cos(2.0 * x) + std::sin(x), 1e-14);
    EXPECT_NEAR(f(x).imag(), 0.0, 1e-14);
  }
  EXPECT_EQ(f.max_frequency(), 2);
}

TEST(Envelope, Values) {
  const auto e = Envelope::decaying(0.5);
  EXPECT_DOUBLE_EQ(evaluate_envelope(e, 0.0), 1.0);
  EXPECT_NEAR(evaluate_envelope(e, 3.0), std::pow(10.0, -0.25), 1e-15);
  EXPECT_THROW(evaluate_envelope(e, -1.0), InvalidArgument);
  EXPECT_DOUBLE_EQ(evaluate_envelope(Envelope::dc(0.5, 400.0), 123.0), 0.05);
  EXPECT_THROW(Envelope::decaying(0.0), InvalidArgument);
}

TEST(Envelope, SquareIntegral) {
  for (double alpha : {0.25, 0.5, 0.75, 1.0, 1.5}) {
    const auto env = Envelope::decaying(alpha);
    for (double n : {10.0, 500.0, 2000.0}) {
      const double numeric = oracle::simpson(
          [&](double s) { return std::pow(1.0 + s * s, -alpha); }, 0.0, n, 2000000);
      EXPECT_NEAR(envelope_square_integral(env, n), numeric, 1e-8 * numeric) << alpha << " " << n;
    }
  }
  EXPECT_DOUBLE_EQ(envelope_square_integral(Envelope::dc(0.5, 100.0), 100.0), 1.0);
}

TEST(TorusPath, DeterministicAndWrapped) {
  const auto a = sample_torus_path(100.0, 0.05, 7);
  const auto b = sample_torus_path(100.0, 0.05, 7);
  const auto c = sample_torus_path(100.0, 0.05, 8);
  ASSERT_EQ(a.positions().size(), 2001u);
  EXPECT_EQ(a.positions()[0], 0.0);
  EXPECT_TRUE(std::equal(a.positions().begin(), a.positions().end(), b.positions().begin()));
  EXPECT_FALSE(std::equal(a.positions().begin(), a.positions().end(), c.positions().begin()));
  for (double x : a.positions()) {
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 2.0 * std::numbers::pi);
  }
}

TEST(TorusPath, IncrementVariance) {
  const double step = 0.05;
  const auto p = sample_torus_path(2000.0, step, 11);
  std::vector<double> inc;
  const auto x = p.positions();
  for (std::size_t i = 1; i < x.size(); ++i) {
    inc.push_back(std::remainder(x[i] - x[i - 1], 2.0 * std::numbers::pi));
  }
  const double var = sample_variance(inc);
  const double se = step * std::sqrt(2.0 / static_cast<double>(inc.size()));
  EXPECT_NEAR(var, step, 4.0 * se);
  EXPECT_NEAR(sample_mean(inc), 0.0, 4.0 * std::sqrt(step / static_cast<double>(inc.size())));
}

TEST(TorusPath, StationaryUniformMarginal) {
  // Long path: the time-average of cos(X) and cos(2X) vanishes.
  const auto p = sample_torus_path(20000.0, 0.1, 5);
  double c1 = 0.0, c2 = 0.0;
  for (double x : p.positions()) {
    c1 += std::cos(x);
    c2 += std::cos(2.0 * x);
  }
  const double k = static_cast<double>(p.positions().size());
  EXPECT_LT(std::abs(c1 / k), 0.03);
  EXPECT_LT(std::abs(c2 / k), 0.03);
}

TEST(SampledPotential, MatchesEnvelopeTimesF) {
  const auto path = sample_torus_path(50.0, 0.05, 3);
  const auto env = Envelope::decaying(0.75);
  const auto pot = sample_potential(path, env, FourierFunction::cosine(), 50.0);
  ASSERT_EQ(pot.values().size(), 1001u);
  for (std::size_t i = 0; i < pot.values().size(); i += 97) {
    const double t = 0.05 * static_cast<double>(i);
    EXPECT_NEAR(pot.values()[i], std::pow(1.0 + t * t, -0.375) * std::cos(path.positions()[i]), 1e-14);
  }
  EXPECT_THROW(sample_potential(path, env, FourierFunction::cosine(), 60.0), InvalidArgument);
}

TEST(Seeds, TrialSeedsDistinct) {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t master : {0ULL, 1ULL, 0xffffffffffffffffULL}) {
    seeds.clear();
    for (std::uint64_t i = 0; i < 20000; ++i) seeds.push_back(trial_seed(master, i));
    for (std::uint64_t i : {1ULL << 40, (1ULL << 62) + 5, (1ULL << 63) - 1}) seeds.push_back(trial_seed(master, i));
    std::sort(seeds.begin(), seeds.end());
    EXPECT_EQ(std::adjacent_find(seeds.begin(), seeds.end()), seeds.end());
  }
}
