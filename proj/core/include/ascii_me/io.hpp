#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ascii_me/scheduler.hpp"

namespace ascii_me {

/// Version of the CSV/JSONL layouts written by this library. Every CSV
/// starts with a `# schema: ascii_me/<table>/v<N>` comment line.
inline constexpr int kCsvSchemaVersion = 1;

/// Shortest round-trippable-enough decimal ("%.12g"); used for every CSV cell
/// so outputs are byte-stable.
std::string format_number(double value);

std::string csv_schema_line(const std::string& table);

nlohmann::json to_json(const IterationReport& report);
IterationReport iteration_report_from_json(const nlohmann::json& j);

/// Columns: iteration, evaluations, qd_score, coverage, max_fitness,
/// added_init, added_isoline, added_ascii, iteration_ms, wall_clock_ms.
std::string report_csv_header();
std::string report_csv_row(const IterationReport& report);

/// End-of-run facts stored next to the reports.
struct RunSummary {
  std::string env;
  nlohmann::json config;
  double qd_score = 0.0;
  double coverage = 0.0;
  std::optional<double> max_fitness;
  double runtime_ms = 0.0;
  std::size_t total_evaluations = 0;
  std::size_t iterations = 0;
  OperatorCounts addition_counters{};
  std::size_t ascii_nonfinite_aborts = 0;
  std::size_t ascii_degenerate_states = 0;
  std::size_t truncated_rollouts = 0;
};

RunSummary summarize(const RunConfig& config, const RunResult& result);
nlohmann::json to_json(const RunSummary& summary);
RunSummary run_summary_from_json(const nlohmann::json& j);

/// Writes one run directory:
///   config.json, reports.jsonl (streamed), reports.csv, summary.json,
///   archive.json, archive.bin, checkpoints/iter_<N>.{bin,json}
class RunWriter {
 public:
  RunWriter(std::filesystem::path dir, const RunConfig& config);

  const std::filesystem::path& dir() const noexcept { return dir_; }

  /// Callbacks that stream reports and write checkpoints into the directory.
  RunCallbacks callbacks();

  void finish(const RunConfig& config, const RunResult& result);

 private:
  std::filesystem::path dir_;
  std::ofstream jsonl_;
};

/// Runs one configuration and writes its directory.
RunSummary run_to_directory(const RunConfig& config, const std::filesystem::path& dir);

}  // namespace ascii_me
