#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ascii_me/io.hpp"
#include "ascii_me/scheduler.hpp"

namespace ascii_me {

// ---------------------------------------------------------------------------
// Efficiency score

struct EfficiencyInput {
  std::string algorithm;
  std::string task;
  std::int64_t batch_size = 0;
  double qd_score = 0.0;
  double runtime = 0.0;
};

struct EfficiencyRow {
  std::string algorithm;
  std::string task;
  std::int64_t batch_size = 0;
  double normalized_qd = 0.0;
  double normalized_runtime = 0.0;
  double adjusted_runtime = 0.0;  ///< 1 - normalized_runtime
  double score = 0.0;
};

struct EfficiencyMean {
  std::string algorithm;
  std::int64_t batch_size = 0;
  double mean_score = 0.0;
  std::size_t tasks = 0;
};

struct EfficiencyTable {
  std::vector<EfficiencyRow> rows;    ///< sorted by (algorithm, task, batch_size)
  std::vector<EfficiencyMean> means;  ///< sorted by (algorithm, batch_size)
  /// Batch size with the highest mean score per algorithm (smallest on ties).
  std::map<std::string, std::int64_t> best_batch_size;
};

/// Min-max normalizes QD score and runtime over the batch sizes of each
/// (algorithm, task), scores normalized_qd * (1 - normalized_runtime), averages
/// over tasks and picks the argmax per algorithm. A degenerate range (max == min)
/// counts as the best value on that axis: normalized_qd = 1, adjusted_runtime = 1.
/// Throws std::invalid_argument on empty input, duplicate keys or non-finite values.
EfficiencyTable efficiency_scores(const std::vector<EfficiencyInput>& inputs);

std::string efficiency_rows_csv(const EfficiencyTable& table);
std::string efficiency_means_csv(const EfficiencyTable& table);

// ---------------------------------------------------------------------------
// Order statistics

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// Linear interpolation between order statistics (numpy's default method).
double quantile(std::vector<double> values, double p);
Quartiles quartiles(const std::vector<double>& values);

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { batch_size, ga_fraction, source_mode };

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& name);

struct SweepSpec {
  RunConfig base;
  SweepAxis axis = SweepAxis::batch_size;
  std::vector<nlohmann::json> values;
  std::vector<std::uint64_t> seeds;
  /// Run configurations concurrently. Runtimes are then not comparable.
  bool parallel_runs = false;

  /// Throws ConfigError when values are empty, seeds repeat, or a derived
  /// configuration is invalid.
  void validate() const;
  RunConfig config_for(const nlohmann::json& value, std::uint64_t seed) const;
};

std::string value_label(const nlohmann::json& value);

struct SweepRun {
  std::string value;
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  bool ok = false;
  std::string error;
  RunSummary summary;
};

struct SweepAggregate {
  std::string value;
  std::size_t completed = 0;
  std::size_t failed = 0;
  Quartiles qd_score;
  Quartiles coverage;
  Quartiles max_fitness;
  Quartiles runtime_ms;
};

struct SweepResult {
  std::vector<SweepRun> runs;
  std::vector<SweepAggregate> aggregates;  ///< in the order of SweepSpec::values
  std::size_t failures() const;
};

/// One run per (value, seed) under out_dir/<axis>=<value>/seed_<seed>/, plus
/// sweep_runs.csv, sweep.jsonl and sweep_aggregate.csv in out_dir (and
/// efficiency.csv for batch-size sweeps). Failed runs are recorded and the
/// sweep continues.
SweepResult run_sweep(const SweepSpec& spec, const std::filesystem::path& out_dir);

std::vector<SweepAggregate> aggregate_runs(const std::vector<nlohmann::json>& values,
                                           const std::vector<SweepRun>& runs);

// ---------------------------------------------------------------------------
// Reporting

struct ReportOutcome {
  std::size_t runs = 0;
  std::vector<std::string> problems;  ///< "<path>: <reason>" for unreadable runs
  std::vector<std::filesystem::path> written;
};

/// Scans results_dir recursively for run directories (containing summary.json
/// or reports.jsonl) and writes into out_dir:
///   metrics_vs_evaluations.csv, metrics_vs_wall_clock.csv, attribution.csv,
///   final_summary.csv, efficiency.csv, efficiency_means.csv
/// Runs are ordered by relative path so output is deterministic.
ReportOutcome report(const std::filesystem::path& results_dir, const std::filesystem::path& out_dir);

}  // namespace ascii_me
