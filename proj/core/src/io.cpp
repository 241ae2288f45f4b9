#include "ascii_me/io.hpp"

#include <cstdio>

#include "ascii_me/config.hpp"

namespace ascii_me {

using nlohmann::json;

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string csv_schema_line(const std::string& table) {
  return "# schema: ascii_me/" + table + "/v" + std::to_string(kCsvSchemaVersion);
}

json to_json(const IterationReport& r) {
  return {{"iteration", r.iteration},
          {"evaluations", r.evaluations},
          {"qd_score", r.qd_score},
          {"coverage", r.coverage},
          {"max_fitness", r.max_fitness ? json(*r.max_fitness) : json(nullptr)},
          {"additions", {{"init", r.additions[0]}, {"isoline", r.additions[1]}, {"ascii", r.additions[2]}}},
          {"iteration_ms", r.iteration_ms},
          {"wall_clock_ms", r.wall_clock_ms}};
}

IterationReport iteration_report_from_json(const json& j) {
  IterationReport r;
  r.iteration = j.at("iteration").get<std::int64_t>();
  r.evaluations = j.at("evaluations").get<std::size_t>();
  r.qd_score = j.at("qd_score").get<double>();
  r.coverage = j.at("coverage").get<double>();
  if (!j.at("max_fitness").is_null()) r.max_fitness = j.at("max_fitness").get<double>();
  const json& a = j.at("additions");
  r.additions = {a.at("init").get<std::int64_t>(), a.at("isoline").get<std::int64_t>(),
                 a.at("ascii").get<std::int64_t>()};
  r.iteration_ms = j.at("iteration_ms").get<double>();
  r.wall_clock_ms = j.at("wall_clock_ms").get<double>();
  return r;
}

std::string report_csv_header() {
  return "iteration,evaluations,qd_score,coverage,max_fitness,added_init,added_isoline,added_ascii,"
         "iteration_ms,wall_clock_ms";
}

std::string report_csv_row(const IterationReport& r) {
  std::string row = std::to_string(r.iteration) + "," + std::to_string(r.evaluations) + "," +
                    format_number(r.qd_score) + "," + format_number(r.coverage) + "," +
                    (r.max_fitness ? format_number(*r.max_fitness) : std::string()) + ",";
  for (auto a : r.additions) row += std::to_string(a) + ",";
  row += format_number(r.iteration_ms) + "," + format_number(r.wall_clock_ms);
  return row;
}

RunSummary summarize(const RunConfig& config, const RunResult& result) {
  RunSummary s;
  s.env = config.env_name;
  s.config = to_json(config);
  const auto m = result.archive.metrics();
  s.qd_score = m.qd_score;
  s.coverage = m.coverage;
  s.max_fitness = m.max_fitness;
  s.runtime_ms = result.runtime_ms;
  s.total_evaluations = result.total_evaluations;
  s.iterations = result.reports.empty() ? 0 : static_cast<std::size_t>(result.reports.back().iteration);
  s.addition_counters = result.archive.addition_counters();
  s.ascii_nonfinite_aborts = result.ascii_diagnostics.nonfinite_aborts;
  s.ascii_degenerate_states = result.ascii_diagnostics.degenerate_states;
  s.truncated_rollouts = result.truncated_rollouts;
  return s;
}

json to_json(const RunSummary& s) {
  return {{"env", s.env},
          {"config", s.config},
          {"qd_score", s.qd_score},
          {"coverage", s.coverage},
          {"max_fitness", s.max_fitness ? json(*s.max_fitness) : json(nullptr)},
          {"runtime_ms", s.runtime_ms},
          {"total_evaluations", s.total_evaluations},
          {"iterations", s.iterations},
          {"addition_counters",
           {{"init", s.addition_counters[0]}, {"isoline", s.addition_counters[1]}, {"ascii", s.addition_counters[2]}}},
          {"ascii_nonfinite_aborts", s.ascii_nonfinite_aborts},
          {"ascii_degenerate_states", s.ascii_degenerate_states},
          {"truncated_rollouts", s.truncated_rollouts}};
}

RunSummary run_summary_from_json(const json& j) {
  RunSummary s;
  s.env = j.at("env").get<std::string>();
  s.config = j.at("config");
  s.qd_score = j.at("qd_score").get<double>();
  s.coverage = j.at("coverage").get<double>();
  if (!j.at("max_fitness").is_null()) s.max_fitness = j.at("max_fitness").get<double>();
  s.runtime_ms = j.at("runtime_ms").get<double>();
  s.total_evaluations = j.at("total_evaluations").get<std::size_t>();
  s.iterations = j.at("iterations").get<std::size_t>();
  const json& c = j.at("addition_counters");
  s.addition_counters = {c.at("init").get<std::int64_t>(), c.at("isoline").get<std::int64_t>(),
                         c.at("ascii").get<std::int64_t>()};
  s.ascii_nonfinite_aborts = j.value("ascii_nonfinite_aborts", std::size_t{0});
  s.ascii_degenerate_states = j.value("ascii_degenerate_states", std::size_t{0});
  s.truncated_rollouts = j.value("truncated_rollouts", std::size_t{0});
  return s;
}

RunWriter::RunWriter(std::filesystem::path dir, const RunConfig& config) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
  std::ofstream(dir_ / "config.json") << to_json(config).dump(2) << "\n";
  jsonl_.open(dir_ / "reports.jsonl");
  if (!jsonl_) throw std::runtime_error("cannot write " + (dir_ / "reports.jsonl").string());
}

RunCallbacks RunWriter::callbacks() {
  RunCallbacks cb;
  cb.on_report = [this](const IterationReport& r) { jsonl_ << to_json(r).dump() << "\n" << std::flush; };
  cb.on_checkpoint = [this](const Archive& archive, const PolicySpec& spec, std::int64_t iteration) {
    const auto ckpt = dir_ / "checkpoints";
    std::filesystem::create_directories(ckpt);
    const std::string stem = "iter_" + std::to_string(iteration);
    std::ofstream bin(ckpt / (stem + ".bin"), std::ios::binary);
    archive.write_binary(bin, spec);
    std::ofstream(ckpt / (stem + ".json")) << archive.summary_json() << "\n";
  };
  return cb;
}

void RunWriter::finish(const RunConfig& config, const RunResult& result) {
  jsonl_.close();
  {
    std::ofstream csv(dir_ / "reports.csv");
    csv << csv_schema_line("reports") << "\n" << report_csv_header() << "\n";
    for (const auto& r : result.reports) csv << report_csv_row(r) << "\n";
  }
  std::ofstream(dir_ / "summary.json") << to_json(summarize(config, result)).dump(2) << "\n";
  std::ofstream(dir_ / "archive.json") << result.archive.summary_json() << "\n";
  std::ofstream bin(dir_ / "archive.bin", std::ios::binary);
  result.archive.write_binary(bin, result.policy);
}

RunSummary run_to_directory(const RunConfig& config, const std::filesystem::path& dir) {
  RunWriter writer(dir, config);
  const RunResult result = run(config, writer.callbacks());
  writer.finish(config, result);
  return summarize(config, result);
}

}  // namespace ascii_me
