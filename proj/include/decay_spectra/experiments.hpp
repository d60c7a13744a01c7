#pragma once

// Seeded Monte Carlo experiments over finite-box spectra, their aggregate
// statistics, and report merging.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "limits.hpp"
#include "pointproc.hpp"
#include "potential.hpp"
#include "prufer.hpp"
#include "random.hpp"
#include "report.hpp"
#include "shape.hpp"
#include "stats.hpp"
#include "tridiagonal.hpp"

namespace decay_spectra {

struct RunOptions {
  unsigned jobs = 1;
};

inline constexpr double concentration_width = 0.05;
inline constexpr double count_subwindow = 4.0 * std::numbers::pi;
inline constexpr std::size_t sine_beta_cells = 512;

namespace detail {

// Runs body(i) for i in [0, count) on `jobs` threads. Each index writes only
// its own slot, so results do not depend on scheduling; the exception of the
// lowest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned jobs, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

inline Metric mean_metric(const std::string& name, const std::vector<double>& xs) {
  std::vector<double> finite;
  for (double x : xs) {
    if (std::isfinite(x)) finite.push_back(x);
  }
  if (finite.empty()) return {name, nan(), nan()};
  return {name, sample_mean(finite), standard_error(finite)};
}

inline std::vector<double> column_values(const RunReport& r, const std::string& name) {
  const std::size_t c = r.column(name);
  std::vector<double> out;
  for (const auto& t : r.trials) {
    if (!t.skipped) out.push_back(t.values[c]);
  }
  return out;
}

}  // namespace detail

inline FourierFunction model_function() { return FourierFunction::cosine(); }

// The decoration theta is uniform above the critical exponent for the
// decaying envelope, and from the critical exponent on for the DC model.
inline bool uniform_decoration(const ExperimentConfig& cfg) {
  return cfg.variant == EnvelopeVariant::DC ? cfg.alpha >= 0.5 : cfg.alpha > 0.5;
}

inline SampledPotential trial_potential(const ExperimentConfig& cfg, std::uint64_t seed) {
  const TorusPath path = sample_torus_path(cfg.n, cfg.h, stream_seed(seed, Stream::Path));
  return sample_potential(path, cfg.envelope(), model_function(), cfg.n);
}

enum class LimitKind { Clock, SineBeta, Poisson, None };

inline LimitKind local_limit_kind(const ExperimentConfig& cfg) {
  if (cfg.alpha > 0.5) return LimitKind::Clock;
  if (cfg.alpha < 0.5) return LimitKind::Poisson;
  return cfg.variant == EnvelopeVariant::Decaying ? LimitKind::SineBeta : LimitKind::None;
}

inline std::vector<double> sample_local_limit(const ExperimentConfig& cfg, std::uint64_t seed) {
  const std::uint64_t s = stream_seed(seed, Stream::Limit);
  switch (local_limit_kind(cfg)) {
    case LimitKind::Clock: return sample_clock(std::nullopt, local_lambda_window, s);
    case LimitKind::Poisson: return sample_poisson_process(local_lambda_window, s);
    case LimitKind::SineBeta:
      return sample_sine_beta(lyapunov_tau(model_function(), *cfg.e0), local_lambda_window, default_t_min,
                              sine_beta_cells, s);
    case LimitKind::None: break;
  }
  return {};
}

inline const std::vector<std::string>& local_columns() {
  static const std::vector<std::string> c{"theta", "points", "gap_mean", "gap_sd", "mark_cdf_distance",
                                          "mark_concentration", "limit_points"};
  return c;
}

inline TrialRecord run_local_trial(const ExperimentConfig& cfg, std::size_t index) {
  TrialRecord rec;
  rec.index = index;
  rec.seed = trial_seed(cfg.master_seed, index);
  const double e0 = *cfg.e0;
  const SampledPotential pot = trial_potential(cfg, rec.seed);
  const TridiagonalOperator op = discretize(pot, cfg.h);
  const double theta = uniform_decoration(cfg) ? uniform_theta(rec.seed) : 0.0;
  const Interval pre = preimage_window(e0, cfg.n, local_lambda_window, theta);
  std::vector<double> energies;
  if (pre.hi > pre.lo) energies = eigenvalues_in_window(op, pre.lo, pre.hi, default_bisection_tol(op));
  std::vector<ShapeMeasure> marks;
  try {
    const auto pairs = eigenvectors(op, energies);
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      marks.push_back(shape_from_eigenpair(pairs[j], energies[j], cfg.n, cfg.m));
    }
  } catch (const NumericFailure&) {
    rec.skipped = true;
    rec.values.assign(local_columns().size(), detail::nan());
    return rec;
  }
  DecoratedPointProcess xi = local_process_with_theta(energies, marks, e0, cfg.n, local_lambda_window, theta);
  rec.points = xi.points;
  double cdf_sum = 0.0, conc_sum = 0.0;
  const ShapeMeasure flat = ShapeMeasure::uniform(cfg.m);
  for (const auto& mu : xi.marks) {
    cdf_sum += cdf_distance(mu, flat);
    conc_sum += concentration_mass(mu, localization_center(mu), concentration_width);
  }
  const double k = static_cast<double>(xi.marks.size());
  double gmean = detail::nan(), gsd = detail::nan();
  if (xi.points.size() >= 2) {
    const GapStatistics g = gap_statistics(xi.points);
    gmean = g.mean;
    gsd = g.sd;
  }
  rec.limit_points = sample_local_limit(cfg, rec.seed);
  rec.values = {theta,
                static_cast<double>(xi.points.size()),
                gmean,
                gsd,
                k > 0 ? cdf_sum / k : detail::nan(),
                k > 0 ? conc_sum / k : detail::nan(),
                static_cast<double>(rec.limit_points.size())};
  return rec;
}

inline const std::vector<std::string>& global_columns() {
  static const std::vector<std::string> c{"energy", "tau", "cdf_distance", "center",
                                          "concentration", "tail_slope", "slope_ratio"};
  return c;
}

inline TailCoordinate tail_coordinate(const ExperimentConfig& cfg) {
  return cfg.variant == EnvelopeVariant::DC ? TailCoordinate::Linear : TailCoordinate::LogRatio;
}

inline ShapeVariant limit_shape_variant(const ExperimentConfig& cfg) {
  return cfg.variant == EnvelopeVariant::DC ? ShapeVariant::Linear : ShapeVariant::LogRatio;
}

inline double safe_tail_exponent(const ShapeMeasure& mu, double center, TailCoordinate coord) {
  try {
    return tail_exponent(mu, center, coord);
  } catch (const InvalidArgument&) {
    return detail::nan();
  }
}

inline TrialRecord run_global_trial(const ExperimentConfig& cfg, std::size_t index) {
  TrialRecord rec;
  rec.index = index;
  rec.seed = trial_seed(cfg.master_seed, index);
  const Interval J = *cfg.window;
  const SampledPotential pot = trial_potential(cfg, rec.seed);
  const TridiagonalOperator op = discretize(pot, cfg.h);
  const std::size_t below = sturm_count(op, J.lo);
  const std::size_t count = sturm_count(op, J.hi) - below;
  rec.values.assign(global_columns().size(), detail::nan());
  if (count == 0) {
    rec.skipped = true;
    return rec;
  }
  Rng pick(stream_seed(rec.seed, Stream::Pick));
  const std::size_t offset = std::min(count - 1, static_cast<std::size_t>(uniform01(pick) * static_cast<double>(count)));
  const double energy = eigenvalue_by_index(op, below + offset, J.lo, J.hi, default_bisection_tol(op));
  EigenPair pair;
  try {
    pair = eigenvector(op, energy, {}, stream_seed(rec.seed, Stream::Eigenvector));
  } catch (const NumericFailure&) {
    rec.skipped = true;
    return rec;
  }
  const ShapeMeasure mu = shape_from_eigenpair(pair, energy, cfg.n, cfg.m);
  const double tau = lyapunov_tau(model_function(), energy);
  const double center = localization_center(mu);
  const double slope = safe_tail_exponent(mu, center, tail_coordinate(cfg));
  rec.values = {energy,
                tau,
                cdf_distance(mu, ShapeMeasure::uniform(cfg.m)),
                center,
                concentration_mass(mu, center, concentration_width),
                slope,
                slope / (-2.0 * tau)};
  rec.shape.assign(mu.density().begin(), mu.density().end());
  return rec;
}

inline const std::vector<std::string>& limit_columns() {
  static const std::vector<std::string> c{"u", "center", "center_error", "tail_slope", "concentration",
                                          "rtilde_increment", "sine_points", "sine_gap_sd"};
  return c;
}

inline TrialRecord run_limit_trial(const ExperimentConfig& cfg, std::size_t index) {
  TrialRecord rec;
  rec.index = index;
  rec.seed = trial_seed(cfg.master_seed, index);
  const double tau = lyapunov_tau(model_function(), *cfg.e0);
  const ShapeVariant variant = limit_shape_variant(cfg);
  const LimitShapeSample s = sample_limit_shape_critical(tau, cfg.m, variant, rec.seed);
  const double center = localization_center(s.shape);
  const double err = variant == ShapeVariant::LogRatio ? std::abs(std::log(center / s.u)) : std::abs(center - s.u);
  const std::vector<double> grid{0.5, 1.0};
  const SdePath r = simulate_rtilde(tau, grid, rec.seed);
  double gsd = detail::nan();
  if (cfg.variant == EnvelopeVariant::Decaying) {
    rec.limit_points = sample_sine_beta(tau, local_lambda_window, default_t_min, sine_beta_cells,
                                        stream_seed(rec.seed, Stream::Decoration));
    if (rec.limit_points.size() >= 2) gsd = gap_statistics(rec.limit_points).sd;
  }
  rec.values = {s.u,
                center,
                err,
                safe_tail_exponent(s.shape, s.u, tail_coordinate(cfg)),
                concentration_mass(s.shape, s.u, concentration_width),
                r.values[1] - r.values[0],
                static_cast<double>(rec.limit_points.size()),
                gsd};
  rec.shape.assign(s.shape.density().begin(), s.shape.density().end());
  return rec;
}

namespace detail {

inline std::vector<double> pooled_gaps(const RunReport& r, bool limit) {
  std::vector<double> g;
  for (const auto& t : r.trials) {
    if (t.skipped) continue;
    const auto gaps = consecutive_gaps(limit ? t.limit_points : t.points);
    g.insert(g.end(), gaps.begin(), gaps.end());
  }
  return g;
}

inline std::vector<double> pooled_counts(const RunReport& r, bool limit) {
  const auto per = static_cast<std::size_t>(std::floor(local_lambda_window.length() / count_subwindow + 1e-9));
  std::vector<double> c;
  for (const auto& t : r.trials) {
    if (t.skipped) continue;
    const auto k = subwindow_counts(limit ? t.limit_points : t.points, local_lambda_window, count_subwindow, per);
    c.insert(c.end(), k.begin(), k.end());
  }
  return c;
}

inline void push_gap_metrics(std::vector<Metric>& out, const std::string& prefix, const std::vector<double>& g) {
  if (g.empty()) {
    out.push_back({prefix + "gap_mean", nan(), nan()});
    out.push_back({prefix + "gap_sd", nan(), nan()});
    return;
  }
  const double sd = sample_sd(g);
  out.push_back({prefix + "gap_mean", sample_mean(g), standard_error(g)});
  out.push_back({prefix + "gap_sd", sd, g.size() > 1 ? sd / std::sqrt(2.0 * static_cast<double>(g.size() - 1)) : nan()});
}

inline void push_dispersion(std::vector<Metric>& out, const std::string& prefix, std::vector<double> counts) {
  if (counts.size() < 2) {
    out.push_back({prefix + "dispersion", nan(), nan()});
    return;
  }
  const double k = static_cast<double>(counts.size());
  const CountingStatistics s = count_dispersion(std::move(counts));
  out.push_back({prefix + "dispersion", s.dispersion, std::sqrt(2.0 / (k - 1.0))});
}

inline double exponential_pi_cdf(double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x / std::numbers::pi); }

}  // namespace detail

// Aggregates are recomputed from the per-trial records in index order, so a
// merged report matches a single run exactly.
inline void aggregate(RunReport& r) {
  r.metrics.clear();
  std::size_t skipped = 0;
  for (const auto& t : r.trials) skipped += t.skipped ? 1 : 0;
  auto& m = r.metrics;
  m.push_back({"trials", static_cast<double>(r.trials.size()), 0.0});
  m.push_back({"skipped_trials", static_cast<double>(skipped), 0.0});
  switch (r.config.experiment) {
    case Experiment::Local: {
      m.push_back(detail::mean_metric("points_per_trial", detail::column_values(r, "points")));
      const auto g = detail::pooled_gaps(r, false);
      const auto lg = detail::pooled_gaps(r, true);
      detail::push_gap_metrics(m, "", g);
      detail::push_dispersion(m, "", detail::pooled_counts(r, false));
      m.push_back({"ks_gaps_vs_exponential", g.empty() ? detail::nan() : ks_one_sample(g, detail::exponential_pi_cdf), 0.0});
      m.push_back({"ks_gaps_vs_limit", g.empty() || lg.empty() ? detail::nan() : two_sample_ks(g, lg), 0.0});
      detail::push_gap_metrics(m, "limit_", lg);
      detail::push_dispersion(m, "limit_", detail::pooled_counts(r, true));
      m.push_back(detail::mean_metric("mark_cdf_distance", detail::column_values(r, "mark_cdf_distance")));
      m.push_back(detail::mean_metric("mark_concentration", detail::column_values(r, "mark_concentration")));
      break;
    }
    case Experiment::Global: {
      const Interval J = r.config.window.value_or(Interval{1.0, 2.0});
      const auto energies = detail::column_values(r, "energy");
      const double a = std::sqrt(J.lo), b = std::sqrt(J.hi);
      m.push_back({"ks_energy", energies.empty() ? detail::nan() : ks_one_sample(energies, [&](double e) {
                     return std::clamp((std::sqrt(std::max(e, 0.0)) - a) / (b - a), 0.0, 1.0);
                   }), 0.0});
      m.push_back(detail::mean_metric("cdf_distance", detail::column_values(r, "cdf_distance")));
      m.push_back(detail::mean_metric("concentration", detail::column_values(r, "concentration")));
      const auto centers = detail::column_values(r, "center");
      m.push_back({"ks_centers_uniform", centers.empty() ? detail::nan() : ks_one_sample(centers, [](double x) {
                     return std::clamp(x, 0.0, 1.0);
                   }), 0.0});
      m.push_back(detail::mean_metric("tail_slope", detail::column_values(r, "tail_slope")));
      m.push_back(detail::mean_metric("slope_ratio", detail::column_values(r, "slope_ratio")));
      break;
    }
    case Experiment::LimitOnly: {
      const auto err = detail::column_values(r, "center_error");
      double hit = 0.0;
      for (double e : err) hit += e < 0.1 ? 1.0 : 0.0;
      const double k = static_cast<double>(err.size());
      const double frac = k > 0 ? hit / k : detail::nan();
      m.push_back({"center_recovery_fraction", frac, k > 0 ? std::sqrt(frac * (1.0 - frac) / k) : detail::nan()});
      m.push_back(detail::mean_metric("tail_slope", detail::column_values(r, "tail_slope")));
      m.push_back(detail::mean_metric("concentration", detail::column_values(r, "concentration")));
      const auto inc = detail::column_values(r, "rtilde_increment");
      m.push_back(detail::mean_metric("rtilde_increment_mean", inc));
      m.push_back({"rtilde_increment_variance", inc.size() > 1 ? sample_variance(inc) : detail::nan(),
                   inc.size() > 1 ? sample_variance(inc) * std::sqrt(2.0 / static_cast<double>(inc.size() - 1))
                                  : detail::nan()});
      const auto centers = detail::column_values(r, "center");
      m.push_back({"ks_centers_uniform", centers.empty() ? detail::nan() : ks_one_sample(centers, [](double x) {
                     return std::clamp(x, 0.0, 1.0);
                   }), 0.0});
      detail::push_gap_metrics(m, "sine_", detail::pooled_gaps(r, true));
      detail::push_dispersion(m, "sine_", detail::pooled_counts(r, true));
      break;
    }
    case Experiment::CrossCheck: {
      double passed = 0.0;
      for (const auto& c : r.checks) passed += c.passed ? 1.0 : 0.0;
      m.push_back({"checks_passed", passed, 0.0});
      m.push_back({"checks_total", static_cast<double>(r.checks.size()), 0.0});
      break;
    }
  }
}

namespace detail {

template <class Trial>
RunReport run_trials(const ExperimentConfig& cfg, const std::vector<std::string>& columns, const RunOptions& opt,
                     Trial&& trial) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  RunReport r;
  r.config = cfg;
  r.columns = columns;
  r.trials.resize(cfg.trials);
  parallel_for(cfg.trials, opt.jobs, [&](std::size_t i) { r.trials[i] = trial(cfg, cfg.first_trial + i); });
  aggregate(r);
  r.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline void require_experiment(const ExperimentConfig& cfg, Experiment e) {
  if (cfg.experiment != e) throw InvalidArgument(std::string("experiment: expected ") + to_string(e));
}

}  // namespace detail

inline RunReport run_local_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  detail::require_experiment(cfg, Experiment::Local);
  return detail::run_trials(cfg, local_columns(), opt, run_local_trial);
}

inline RunReport run_global_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  detail::require_experiment(cfg, Experiment::Global);
  return detail::run_trials(cfg, global_columns(), opt, run_global_trial);
}

inline RunReport run_limit_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  detail::require_experiment(cfg, Experiment::LimitOnly);
  return detail::run_trials(cfg, limit_columns(), opt, run_limit_trial);
}

inline RunReport merge_reports(const RunReport& a, const RunReport& b) {
  if (config_hash(a.config) != config_hash(b.config)) throw InvalidArgument("merge: config mismatch");
  if (a.columns != b.columns) throw InvalidArgument("merge: column mismatch");
  if (a.config.experiment == Experiment::CrossCheck) throw InvalidArgument("merge: crosscheck reports do not merge");
  if (a.config.trials == 0) return b;
  if (b.config.trials == 0) return a;
  const RunReport& lo = a.config.first_trial <= b.config.first_trial ? a : b;
  const RunReport& hi = &lo == &a ? b : a;
  if (lo.config.first_trial + lo.config.trials != hi.config.first_trial) {
    throw InvalidArgument("merge: trial ranges must be disjoint and adjacent");
  }
  RunReport out;
  out.config = lo.config;
  out.config.trials = lo.config.trials + hi.config.trials;
  out.columns = lo.columns;
  out.trials = lo.trials;
  out.trials.insert(out.trials.end(), hi.trials.begin(), hi.trials.end());
  out.wall_time_seconds = a.wall_time_seconds + b.wall_time_seconds;
  aggregate(out);
  return out;
}

}  // namespace decay_spectra
