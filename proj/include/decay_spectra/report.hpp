#pragma once

// Run reports: per-trial records, aggregate metrics, oracle checks, and their
// CSV / JSON serialization.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "config.hpp"
#include "errors.hpp"
#include "format.hpp"

namespace decay_spectra {

struct TrialRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool skipped = false;
  std::vector<double> values;        // aligned with RunReport::columns
  std::vector<double> points;        // finite-n rescaled eigenvalues (local)
  std::vector<double> limit_points;  // matching limit-object sample
  std::vector<double> shape;         // one shape density, or empty
};

struct Metric {
  std::string name;
  double value = 0.0;
  double stderr_ = 0.0;
};

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<std::string> columns;
  std::vector<TrialRecord> trials;  // ascending index
  std::vector<Metric> metrics;
  std::vector<CheckResult> checks;
  double wall_time_seconds = 0.0;   // informational, never serialized

  const Metric* metric(const std::string& name) const {
    for (const auto& m : metrics) {
      if (m.name == name) return &m;
    }
    return nullptr;
  }
  double value(const std::string& name) const {
    const Metric* m = metric(name);
    if (!m) throw InvalidArgument("RunReport: no metric '" + name + "'");
    return m->value;
  }
  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    throw InvalidArgument("RunReport: no column '" + name + "'");
  }
  bool all_checks_passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
};

enum class ReportFormat { CSV, JSON };

inline ReportFormat parse_format(const std::string& s) {
  if (s == "csv") return ReportFormat::CSV;
  if (s == "json") return ReportFormat::JSON;
  throw InvalidArgument("format: expected csv|json, got '" + s + "'");
}

namespace detail {

// NaN / inf have no JSON literal; they travel as null.
inline nlohmann::json json_number(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

inline double json_double(const nlohmann::json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

inline nlohmann::json json_array(const std::vector<double>& xs) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : xs) a.push_back(json_number(x));
  return a;
}

inline std::vector<double> json_vector(const nlohmann::json& a) {
  std::vector<double> out;
  out.reserve(a.size());
  for (const auto& v : a) out.push_back(json_double(v));
  return out;
}

inline std::string sibling_path(const std::string& path, const std::string& suffix) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
    return path.substr(0, dot) + suffix + path.substr(dot);
  }
  return path + suffix + ".csv";
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace detail

inline nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json j;
  j["config"] = to_json(r.config);
  j["config_hash"] = config_hash(r.config);
  j["columns"] = r.columns;
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : r.trials) {
    nlohmann::json row;
    row["trial"] = t.index;
    row["seed"] = t.seed;
    row["skipped"] = t.skipped;
    row["values"] = detail::json_array(t.values);
    row["points"] = detail::json_array(t.points);
    row["limit_points"] = detail::json_array(t.limit_points);
    row["shape"] = detail::json_array(t.shape);
    trials.push_back(std::move(row));
  }
  j["trials"] = std::move(trials);
  nlohmann::json metrics = nlohmann::json::array();
  for (const auto& m : r.metrics) {
    metrics.push_back({{"metric", m.name}, {"value", detail::json_number(m.value)},
                       {"stderr", detail::json_number(m.stderr_)}});
  }
  j["metrics"] = std::move(metrics);
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"check", c.name}, {"value", detail::json_number(c.value)},
                      {"tolerance", detail::json_number(c.tolerance)}, {"passed", c.passed}});
  }
  j["checks"] = std::move(checks);
  return j;
}

inline RunReport report_from_json(const nlohmann::json& j) {
  RunReport r;
  r.config = config_from_json(j.at("config"));
  r.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& row : j.at("trials")) {
    TrialRecord t;
    t.index = row.at("trial").get<std::size_t>();
    t.seed = row.at("seed").get<std::uint64_t>();
    t.skipped = row.at("skipped").get<bool>();
    t.values = detail::json_vector(row.at("values"));
    t.points = detail::json_vector(row.at("points"));
    t.limit_points = detail::json_vector(row.at("limit_points"));
    t.shape = detail::json_vector(row.at("shape"));
    r.trials.push_back(std::move(t));
  }
  for (const auto& m : j.at("metrics")) {
    r.metrics.push_back({m.at("metric").get<std::string>(), detail::json_double(m.at("value")),
                         detail::json_double(m.at("stderr"))});
  }
  for (const auto& c : j.at("checks")) {
    r.checks.push_back({c.at("check").get<std::string>(), detail::json_double(c.at("value")),
                        detail::json_double(c.at("tolerance")), c.at("passed").get<bool>()});
  }
  return r;
}

inline RunReport read_report_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("'" + path + "' is not valid JSON: " + e.what());
  }
  return report_from_json(j);
}

// In-memory CSV files: main table first, then the sibling tables.
struct CsvFiles {
  std::string main, points, gaps, limit_points, shapes, summary;
};

inline CsvFiles report_to_csv(const RunReport& r) {
  CsvFiles f;
  std::ostringstream main, pts, gaps, lim, shapes, summary;
  if (r.config.experiment == Experiment::CrossCheck) {
    main << "check,value,tolerance,passed\n";
    for (const auto& c : r.checks) {
      main << c.name << ',' << format_double(c.value) << ',' << format_double(c.tolerance) << ','
           << (c.passed ? 1 : 0) << '\n';
    }
  } else {
    main << "trial,seed,skipped";
    for (const auto& c : r.columns) main << ',' << c;
    main << '\n';
    for (const auto& t : r.trials) {
      main << t.index << ',' << t.seed << ',' << (t.skipped ? 1 : 0);
      for (double v : t.values) main << ',' << format_double(v);
      main << '\n';
    }
  }
  pts << "trial,lambda\n";
  gaps << "trial,gap\n";
  lim << "trial,lambda\n";
  shapes << "trial,cell,density\n";
  for (const auto& t : r.trials) {
    for (double x : t.points) pts << t.index << ',' << format_double(x) << '\n';
    for (std::size_t i = 1; i < t.points.size(); ++i) {
      gaps << t.index << ',' << format_double(t.points[i] - t.points[i - 1]) << '\n';
    }
    for (double x : t.limit_points) lim << t.index << ',' << format_double(x) << '\n';
    for (std::size_t i = 0; i < t.shape.size(); ++i) {
      shapes << t.index << ',' << i << ',' << format_double(t.shape[i]) << '\n';
    }
  }
  summary << "metric,value,stderr\n";
  for (const auto& m : r.metrics) {
    summary << m.name << ',' << format_double(m.value) << ',' << format_double(m.stderr_) << '\n';
  }
  f.main = main.str();
  f.points = pts.str();
  f.gaps = gaps.str();
  f.limit_points = lim.str();
  f.shapes = shapes.str();
  f.summary = summary.str();
  return f;
}

// CSV writes `path` plus _points, _gaps, _limit_points, _shapes and _summary
// siblings; JSON writes the single file `path`. Existing files are replaced.
inline void emit_report(const RunReport& r, ReportFormat format, const std::string& path) {
  if (format == ReportFormat::JSON) {
    detail::write_file(path, report_to_json(r).dump(1) + "\n");
    return;
  }
  const CsvFiles f = report_to_csv(r);
  detail::write_file(path, f.main);
  detail::write_file(detail::sibling_path(path, "_points"), f.points);
  detail::write_file(detail::sibling_path(path, "_gaps"), f.gaps);
  detail::write_file(detail::sibling_path(path, "_limit_points"), f.limit_points);
  detail::write_file(detail::sibling_path(path, "_shapes"), f.shapes);
  detail::write_file(detail::sibling_path(path, "_summary"), f.summary);
}

}  // namespace decay_spectra
