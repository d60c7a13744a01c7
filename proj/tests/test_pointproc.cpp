#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <decay_spectra/experiments.hpp>
#include <decay_spectra/limits.hpp>
#include <decay_spectra/pointproc.hpp>

using namespace decay_spectra;

namespace {
constexpr double pi = std::numbers::pi;

SampledPotential random_potential(double n, double h, double alpha, std::uint64_t seed) {
  return sample_potential(sample_torus_path(n, h, seed), Envelope::decaying(alpha), FourierFunction::cosine(), n);
}
}  // namespace

TEST(LocalProcess, FreePotentialLattice) {
  const double n = 1000.0, h = 0.05;
  const auto op = discretize(SampledPotential::zero(n, h), h);
  const long m = 80;
  const double e0 = std::pow(m * pi / n, 2.0);
  const Interval window{-10.0 * pi, 10.0 * pi};
  const Interval pre = preimage_window(e0, n, window, 0.0);
  const auto ev = eigenvalues_in_window(op, pre.lo, pre.hi, default_bisection_tol(op));
  const auto xi = local_process(ev, {}, e0, n, window, 0.25, 3);
  EXPECT_EQ(xi.theta_shift, 0.0);
  ASSERT_GE(xi.points.size(), 19u);
  for (double x : xi.points) {
    const double j = std::round(x / pi);
    EXPECT_NEAR(x, j * pi, 0.02 * (1.0 + std::abs(j))) << x;
  }
}

TEST(LocalProcess, RescalingIsExactAndCountsMatchSturm) {
  const double n = 500.0, h = 0.05, e0 = 1.0 / 16.0;
  const auto op = discretize(random_potential(n, h, 1.0, 6), h);
  const Interval window{-10.0 * pi, 10.0 * pi};
  const double theta = decoration_theta(1.0, 77);
  EXPECT_GE(theta, 0.0);
  EXPECT_LT(theta, pi);
  const Interval pre = preimage_window(e0, n, window, theta);
  const auto ev = eigenvalues_in_window(op, pre.lo, pre.hi, default_bisection_tol(op));
  const auto xi = local_process(ev, {}, e0, n, window, 1.0, 77);
  EXPECT_EQ(xi.theta_shift, theta);
  EXPECT_EQ(xi.points.size(), sturm_count(op, pre.hi) - sturm_count(op, pre.lo));
  for (std::size_t j = 0; j < xi.points.size(); ++j) {
    EXPECT_NEAR(unscale_point(xi.points[j], e0, n, theta), ev[j], 1e-10 * ev[j]);
    if (j > 0) {
      EXPECT_GT(xi.points[j], xi.points[j - 1]);
    }
  }
}

TEST(LocalProcess, EmptyDeterministicAndValidated) {
  const std::vector<double> none;
  EXPECT_TRUE(local_process(none, {}, 0.1, 100.0, {0.0, 1.0}, 1.0, 1).points.empty());
  EXPECT_THROW(local_process(none, {}, 0.0, 100.0, {0.0, 1.0}, 1.0, 1), InvalidArgument);
  const std::vector<double> ev{0.09, 0.1, 0.11};
  const auto a = local_process(ev, {}, 0.1, 100.0, {-10.0, 10.0}, 1.0, 5);
  const auto b = local_process(ev, {}, 0.1, 100.0, {-10.0, 10.0}, 1.0, 5);
  EXPECT_EQ(a.points, b.points);
  EXPECT_EQ(a.theta_shift, b.theta_shift);
}

TEST(GapStatistics, Arithmetic) {
  std::vector<double> p;
  for (int i = 0; i < 20; ++i) p.push_back(i * pi);
  const auto g = gap_statistics(p);
  EXPECT_NEAR(g.mean, pi, 1e-12);
  EXPECT_NEAR(g.sd, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(g.cdf(pi + 1e-9), 1.0);
  EXPECT_THROW(gap_statistics(std::vector<double>{1.0}), InvalidArgument);
}

TEST(GapStatistics, PoissonGapsAreExponential) {
  const auto p = sample_poisson_process({0.0, 10000.0 * pi}, 3);
  const auto g = gap_statistics(p);
  EXPECT_NEAR(g.mean, pi, 3.0 * pi / std::sqrt(static_cast<double>(g.gaps.size())));
  const double ks = ks_one_sample(g.gaps, [](double x) { return 1.0 - std::exp(-x / pi); });
  EXPECT_LT(ks, 0.02);
}

TEST(CountingStatistics, LatticeAndPoisson) {
  const auto clock = sample_clock(0.5, {0.0, 1000.0 * pi});
  EXPECT_NEAR(counting_statistics(clock, {0.0, 1000.0 * pi}, pi, 1000).dispersion, 0.0, 1e-12);
  const Interval w{0.0, 4000.0 * pi};
  const auto pois = sample_poisson_process(w, 8);
  const auto s = counting_statistics(pois, w, 4.0 * pi, 1000);
  EXPECT_NEAR(s.mean, 4.0, 0.2);
  EXPECT_NEAR(s.dispersion, 1.0, 0.1);
  EXPECT_THROW(counting_statistics(pois, w, 5.0 * pi, 1000), InvalidArgument);
}

TEST(CountingStatistics, SineBetaBetweenClockAndPoisson) {
  const Interval w{0.0, 20.0 * pi};
  std::vector<double> counts;
  for (std::uint64_t s = 0; s < 60; ++s) {
    const auto pts = sample_sine_beta(2.0, w, default_t_min, 512, s);
    const auto c = subwindow_counts(pts, w, 4.0 * pi, 5);
    counts.insert(counts.end(), c.begin(), c.end());
  }
  const double d = count_dispersion(counts).dispersion;
  EXPECT_GT(d, 0.05);
  EXPECT_LT(d, 0.8);
}

TEST(TwoSampleKs, Examples) {
  const std::vector<double> a{1.0, 2.0, 3.0};
  EXPECT_DOUBLE_EQ(two_sample_ks(a, a), 0.0);
  EXPECT_DOUBLE_EQ(two_sample_ks(a, {10.0, 11.0}), 1.0);
  EXPECT_THROW(two_sample_ks({}, a), InvalidArgument);
  std::mt19937_64 rng(2);
  std::exponential_distribution<double> e(1.0 / pi);
  std::vector<double> x(10000), y(10000);
  for (auto& v : x) v = e(rng);
  for (auto& v : y) v = e(rng);
  EXPECT_LT(two_sample_ks(x, y), 0.03);
  EXPECT_DOUBLE_EQ(two_sample_ks(x, y), two_sample_ks(y, x));
}

TEST(RegimeDiscrimination, GapSdOrdering) {
  // Clock most rigid, Poisson least: gap sd increases as alpha decreases.
  std::vector<double> sds;
  for (double alpha : {1.0, 0.5, 0.25}) {
    ExperimentConfig cfg;
    cfg.experiment = Experiment::Local;
    cfg.alpha = alpha;
    cfg.e0 = 1.0 / 16.0;
    cfg.n = 2000.0;
    cfg.trials = 200;
    sds.push_back(run_local_experiment(cfg).value("gap_sd"));
  }
  EXPECT_LT(sds[0], sds[1]);
  EXPECT_LT(sds[1], sds[2]);
}
