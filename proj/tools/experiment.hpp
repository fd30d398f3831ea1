#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace slngbm::cli {

using Json = nlohmann::ordered_json;

/// One experiment invocation; fully serializable, and together with the
/// code version it determines every output byte (wall time excepted, which
/// only appears in the provenance block of the JSON report).
struct ExperimentSpec {
  int schema_version = 1;
  std::string command;  // simulate | moments | qvcheck | nontight | pde | report
  int n = 3;
  double tau = 1.0;
  std::vector<double> tau_grid;  // nontight/pde horizons; default {10, 20, 40}
  double dt = 0.0;               // 0 = pick default by horizon
  std::int64_t n_paths = 100000;
  std::int64_t qv_samples = 1000000;
  std::uint64_t seed = 1;
  std::string scheme = "exponential";
  int p = 2;
  std::string out_dir = "out";
  std::string format = "both";  // csv | json | both
  std::string input;            // report command: existing report.json
  int workers = 0;              // 0 = SLN_GBM_THREADS or hardware

  double effective_dt(double horizon) const;
  void validate() const;

  static ExperimentSpec from_json_file(const std::string& path);
  Json to_json() const;
};

/// One line of the fixed-schema CSV output.
struct ResultRow {
  std::string command;
  int n = 0;
  std::string p_or_partition;
  double tau = 0.0;
  std::string scheme;
  std::optional<double> dt;
  std::optional<std::int64_t> n_paths;
  std::optional<std::uint64_t> seed;
  std::optional<double> estimate;
  std::optional<double> stderr_;
  std::optional<double> exact_value;
  std::optional<double> lower_bound;
  std::optional<double> upper_bound;
  std::string flag;  // ok | pass | fail | ref
};

struct Report {
  ExperimentSpec spec;
  std::vector<ResultRow> rows;
  Json series = Json::object();
  std::vector<std::string> summary;
  double wall_time_s = 0.0;
  int workers_used = 1;
  bool ok = true;

  Json to_json() const;
  std::string to_csv() const;
};

/// Runs the experiment the spec describes and writes report files into
/// spec.out_dir (atomically: temp file + rename). Returns the report;
/// report.ok is false when any flagged check failed or a divergence budget
/// was breached.
Report run_experiment(const ExperimentSpec& spec);

/// Writes the SVG charts derivable from the report's series. Returns the
/// list of files written; empty (with a warning on stderr) when the report
/// carries no plottable series.
std::vector<std::string> emit_plots(const Report& report, const std::string& out_dir);

/// Re-reads an emitted JSON report; throws with the offending field named
/// on malformed input.
Report load_report(const std::string& path);

/// 17-significant-digit representation, round-trip exact for doubles.
std::string format_double(double v);

/// Atomic file write (temp + rename in the destination directory).
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace slngbm::cli
