// Command-line front end: local, global, limit, crosscheck, merge.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include <decay_spectra/decay_spectra.hpp>

namespace ds = decay_spectra;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<double> alpha, e0, n, h;
  std::vector<double> window;
  std::optional<std::size_t> cells, trials, first_trial;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::string out;
  std::string format = "csv";
  unsigned jobs = 1;
};

void add_run_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--alpha", o.alpha, "envelope exponent");
  cmd->add_option("--e0", o.e0, "reference energy E0");
  cmd->add_option("--window", o.window, "energy window a,b")->delimiter(',')->expected(2);
  cmd->add_option("--n", o.n, "box length");
  cmd->add_option("--h", o.h, "grid step");
  cmd->add_option("--cells", o.cells, "shape cells m");
  cmd->add_option("--trials", o.trials, "number of trials");
  cmd->add_option("--first-trial", o.first_trial, "index of the first trial");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--variant", o.variant, "decaying|dc")->check(CLI::IsMember({"decaying", "dc"}));
  cmd->add_option("--out", o.out, "output path (default: summary to stdout)");
  cmd->add_option("--format", o.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
}

ds::ExperimentConfig build_config(ds::Experiment experiment, const Overrides& o) {
  ds::ExperimentConfig cfg;
  cfg.e0 = 1.0 / 16.0;
  cfg.window = ds::Interval{1.0 / 32.0, 1.0 / 8.0};
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw ds::IoError("cannot open '" + o.config_path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ds::InvalidArgument("config: '" + o.config_path + "' is not valid JSON: " + e.what());
    }
    cfg = ds::config_from_json(j, cfg);
  }
  cfg.experiment = experiment;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.e0) cfg.e0 = *o.e0;
  if (!o.window.empty()) cfg.window = ds::Interval{o.window[0], o.window[1]};
  if (o.n) cfg.n = *o.n;
  if (o.h) cfg.h = *o.h;
  if (o.cells) cfg.m = *o.cells;
  if (o.trials) cfg.trials = *o.trials;
  if (o.first_trial) cfg.first_trial = *o.first_trial;
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.variant) cfg.variant = ds::parse_variant(*o.variant);
  ds::apply_seed_override(cfg);
  ds::validate(cfg);
  return cfg;
}

void write_output(const ds::RunReport& r, const std::string& out, const std::string& format) {
  const ds::ReportFormat fmt = ds::parse_format(format);
  if (!out.empty()) {
    ds::emit_report(r, fmt, out);
  } else if (fmt == ds::ReportFormat::JSON) {
    std::cout << ds::report_to_json(r).dump(1) << '\n';
  } else {
    std::cout << ds::report_to_csv(r).summary;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral statistics of 1D Schroedinger operators with decaying random potentials"};
  // "-h" would collide with the grid-step option "--h".
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);

  Overrides o;
  struct Sub {
    const char* name;
    ds::Experiment experiment;
    const char* help;
  };
  const Sub subs[] = {
      {"local", ds::Experiment::Local, "rescaled eigenvalues near E0 (point-process statistics)"},
      {"global", ds::Experiment::Global, "eigenvector shapes for a uniform eigenvalue in J"},
      {"limit", ds::Experiment::LimitOnly, "samples of the limiting objects at tau(E0)"},
      {"crosscheck", ds::Experiment::CrossCheck, "oracle battery"},
  };
  std::vector<std::pair<CLI::App*, ds::Experiment>> runs;
  for (const auto& s : subs) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    add_run_options(cmd, o);
    runs.emplace_back(cmd, s.experiment);
  }

  std::vector<std::string> inputs;
  std::string merge_out, merge_format = "json";
  CLI::App* merge = app.add_subcommand("merge", "merge JSON reports over adjacent trial ranges");
  merge->add_option("inputs", inputs, "JSON reports")->required()->expected(2, -1)->check(CLI::ExistingFile);
  merge->add_option("--out", merge_out, "output path (default: stdout)");
  merge->add_option("--format", merge_format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (merge->parsed()) {
      ds::RunReport r = ds::read_report_json(inputs[0]);
      for (std::size_t i = 1; i < inputs.size(); ++i) r = ds::merge_reports(r, ds::read_report_json(inputs[i]));
      write_output(r, merge_out, merge_format);
      return 0;
    }
    for (const auto& [cmd, experiment] : runs) {
      if (!cmd->parsed()) continue;
      const ds::ExperimentConfig cfg = build_config(experiment, o);
      const ds::RunReport r = ds::run_experiment(cfg, {o.jobs});
      write_output(r, o.out, o.format);
      std::fprintf(stderr, "%s: %zu trials, %zu skipped, %.3f s\n", ds::to_string(experiment), r.trials.size(),
                   static_cast<std::size_t>(r.value("skipped_trials")), r.wall_time_seconds);
      if (experiment == ds::Experiment::CrossCheck) {
        for (const auto& c : r.checks) {
          std::fprintf(stderr, "  %-30s %s  value=%s tol=%s\n", c.name.c_str(), c.passed ? "pass" : "FAIL",
                       ds::format_double(c.value).c_str(), ds::format_double(c.tolerance).c_str());
        }
        return r.all_checks_passed() ? 0 : 1;
      }
      return 0;
    }
  } catch (const ds::InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ds::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ds::NumericFailure& e) {
    std::fprintf(stderr, "numeric failure: %s (residual %g)\n", e.what(), e.last_residual());
    return 4;
  }
  return 0;
}
