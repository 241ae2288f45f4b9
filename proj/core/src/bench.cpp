#include "ascii_me/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "ascii_me/config.hpp"
#include "ascii_me/worker_pool.hpp"

namespace ascii_me {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Efficiency score

EfficiencyTable efficiency_scores(const std::vector<EfficiencyInput>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("efficiency_scores: empty results");

  using Key = std::tuple<std::string, std::string, std::int64_t>;
  std::map<Key, const EfficiencyInput*> by_key;
  for (const auto& in : inputs) {
    if (!std::isfinite(in.qd_score) || !std::isfinite(in.runtime)) {
      throw std::invalid_argument("efficiency_scores: non-finite value for " + in.algorithm + "/" + in.task);
    }
    if (!by_key.emplace(Key{in.algorithm, in.task, in.batch_size}, &in).second) {
      throw std::invalid_argument("efficiency_scores: duplicate entry for " + in.algorithm + "/" + in.task + "/" +
                                  std::to_string(in.batch_size));
    }
  }

  std::map<std::pair<std::string, std::string>, std::vector<const EfficiencyInput*>> groups;
  for (const auto& [key, in] : by_key) groups[{in->algorithm, in->task}].push_back(in);

  EfficiencyTable table;
  std::map<std::pair<std::string, std::int64_t>, std::pair<double, std::size_t>> sums;
  for (const auto& [group, members] : groups) {
    double qd_lo = members.front()->qd_score, qd_hi = qd_lo;
    double rt_lo = members.front()->runtime, rt_hi = rt_lo;
    for (const auto* m : members) {
      qd_lo = std::min(qd_lo, m->qd_score);
      qd_hi = std::max(qd_hi, m->qd_score);
      rt_lo = std::min(rt_lo, m->runtime);
      rt_hi = std::max(rt_hi, m->runtime);
    }
    for (const auto* m : members) {
      EfficiencyRow row;
      row.algorithm = m->algorithm;
      row.task = m->task;
      row.batch_size = m->batch_size;
      row.normalized_qd = qd_hi > qd_lo ? (m->qd_score - qd_lo) / (qd_hi - qd_lo) : 1.0;
      row.normalized_runtime = rt_hi > rt_lo ? (m->runtime - rt_lo) / (rt_hi - rt_lo) : 0.0;
      row.adjusted_runtime = 1.0 - row.normalized_runtime;
      row.score = row.normalized_qd * row.adjusted_runtime;
      auto& acc = sums[{row.algorithm, row.batch_size}];
      acc.first += row.score;
      acc.second += 1;
      table.rows.push_back(std::move(row));
    }
  }

  for (const auto& [key, acc] : sums) {
    table.means.push_back({key.first, key.second, acc.first / static_cast<double>(acc.second), acc.second});
  }
  for (const auto& m : table.means) {
    auto it = table.best_batch_size.find(m.algorithm);
    if (it == table.best_batch_size.end()) {
      table.best_batch_size[m.algorithm] = m.batch_size;
      continue;
    }
    const auto best = std::find_if(table.means.begin(), table.means.end(), [&](const EfficiencyMean& e) {
      return e.algorithm == m.algorithm && e.batch_size == it->second;
    });
    if (m.mean_score > best->mean_score) it->second = m.batch_size;
  }
  return table;
}

std::string efficiency_rows_csv(const EfficiencyTable& table) {
  std::ostringstream out;
  out << csv_schema_line("efficiency") << "\n"
      << "algorithm,task,batch_size,normalized_qd,normalized_runtime,adjusted_runtime,score\n";
  for (const auto& r : table.rows) {
    out << r.algorithm << "," << r.task << "," << r.batch_size << "," << format_number(r.normalized_qd) << ","
        << format_number(r.normalized_runtime) << "," << format_number(r.adjusted_runtime) << ","
        << format_number(r.score) << "\n";
  }
  return out.str();
}

std::string efficiency_means_csv(const EfficiencyTable& table) {
  std::ostringstream out;
  out << csv_schema_line("efficiency_means") << "\n" << "algorithm,batch_size,tasks,mean_score,best\n";
  for (const auto& m : table.means) {
    const bool best = table.best_batch_size.at(m.algorithm) == m.batch_size;
    out << m.algorithm << "," << m.batch_size << "," << m.tasks << "," << format_number(m.mean_score) << ","
        << (best ? 1 : 0) << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Order statistics

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Quartiles quartiles(const std::vector<double>& values) {
  return {quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75)};
}

// ---------------------------------------------------------------------------
// Sweeps

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::batch_size: return "batch_size";
    case SweepAxis::ga_fraction: return "ga_fraction";
    case SweepAxis::source_mode: return "source_mode";
  }
  return "?";
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "batch_size") return SweepAxis::batch_size;
  if (name == "ga_fraction") return SweepAxis::ga_fraction;
  if (name == "source_mode") return SweepAxis::source_mode;
  throw ConfigError("unknown sweep axis '" + name + "' (expected batch_size, ga_fraction or source_mode)");
}

std::string value_label(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_float()) return format_number(value.get<double>());
  return value.dump();
}

RunConfig SweepSpec::config_for(const json& value, std::uint64_t seed) const {
  json doc = to_json(base);
  switch (axis) {
    case SweepAxis::batch_size: doc["batch_size"] = value; break;
    case SweepAxis::ga_fraction: doc["ga_fraction"] = value; break;
    case SweepAxis::source_mode: doc["buffer"]["source_mode"] = value; break;
  }
  doc["seed"] = seed;
  return run_config_from_json(doc);
}

void SweepSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("sweep seeds must be distinct");
  }
  std::set<std::string> labels;
  for (const auto& v : values) {
    if (!labels.insert(value_label(v)).second) throw ConfigError("duplicate sweep value " + value_label(v));
    config_for(v, seeds.front());
  }
}

std::size_t SweepResult::failures() const {
  return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const SweepRun& r) { return !r.ok; }));
}

std::vector<SweepAggregate> aggregate_runs(const std::vector<json>& values, const std::vector<SweepRun>& runs) {
  std::vector<SweepAggregate> out;
  for (const auto& v : values) {
    SweepAggregate agg;
    agg.value = value_label(v);
    std::vector<double> qd, cov, maxf, rt;
    for (const auto& r : runs) {
      if (r.value != agg.value) continue;
      if (!r.ok) {
        ++agg.failed;
        continue;
      }
      ++agg.completed;
      qd.push_back(r.summary.qd_score);
      cov.push_back(r.summary.coverage);
      if (r.summary.max_fitness) maxf.push_back(*r.summary.max_fitness);
      rt.push_back(r.summary.runtime_ms);
    }
    if (!qd.empty()) {
      agg.qd_score = quartiles(qd);
      agg.coverage = quartiles(cov);
      agg.runtime_ms = quartiles(rt);
    }
    if (!maxf.empty()) agg.max_fitness = quartiles(maxf);
    out.push_back(agg);
  }
  return out;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string quartile_cells(const Quartiles& q) {
  return format_number(q.median) + "," + format_number(q.q1) + "," + format_number(q.q3);
}

std::string sweep_aggregate_csv(const std::string& axis, const std::vector<SweepAggregate>& aggs) {
  std::ostringstream out;
  out << csv_schema_line("sweep_aggregate") << "\n" << axis
      << ",completed,failed,qd_median,qd_q1,qd_q3,coverage_median,coverage_q1,coverage_q3,"
         "max_fitness_median,max_fitness_q1,max_fitness_q3,runtime_ms_median,runtime_ms_q1,runtime_ms_q3\n";
  for (const auto& a : aggs) {
    out << a.value << "," << a.completed << "," << a.failed << ",";
    if (a.completed > 0) {
      out << quartile_cells(a.qd_score) << "," << quartile_cells(a.coverage) << "," << quartile_cells(a.max_fitness)
          << "," << quartile_cells(a.runtime_ms);
    } else {
      out << ",,,,,,,,,,,";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec, const fs::path& out_dir) {
  spec.validate();
  fs::create_directories(out_dir);
  const std::string axis = to_string(spec.axis);

  SweepResult result;
  for (const auto& v : spec.values) {
    for (auto seed : spec.seeds) {
      SweepRun r;
      r.value = value_label(v);
      r.seed = seed;
      r.dir = out_dir / (axis + "=" + r.value) / ("seed_" + std::to_string(seed));
      result.runs.push_back(std::move(r));
    }
  }

  auto execute = [&](std::size_t i) {
    SweepRun& r = result.runs[i];
    const json& value = spec.values[i / spec.seeds.size()];
    try {
      r.summary = run_to_directory(spec.config_for(value, r.seed), r.dir);
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
  };
  if (spec.parallel_runs) {
    WorkerPool pool(std::max(1u, std::thread::hardware_concurrency()));
    pool.parallel_for(result.runs.size(), execute);
  } else {
    for (std::size_t i = 0; i < result.runs.size(); ++i) execute(i);
  }

  result.aggregates = aggregate_runs(spec.values, result.runs);

  {
    std::ofstream jsonl(out_dir / "sweep.jsonl");
    for (const auto& r : result.runs) {
      json line = {{"axis", axis}, {"value", r.value}, {"seed", r.seed}, {"ok", r.ok},
                   {"dir", fs::relative(r.dir, out_dir).generic_string()}};
      if (r.ok) {
        line["summary"] = to_json(r.summary);
      } else {
        line["error"] = r.error;
      }
      jsonl << line.dump() << "\n";
    }
  }
  std::ostringstream runs_csv;
  runs_csv << csv_schema_line("sweep_runs") << "\n"
           << axis << ",seed,status,qd_score,coverage,max_fitness,runtime_ms,evaluations,dir\n";
  for (const auto& r : result.runs) {
    runs_csv << r.value << "," << r.seed << "," << (r.ok ? "ok" : "failed") << ",";
    if (r.ok) {
      runs_csv << format_number(r.summary.qd_score) << "," << format_number(r.summary.coverage) << ","
               << (r.summary.max_fitness ? format_number(*r.summary.max_fitness) : "") << ","
               << format_number(r.summary.runtime_ms) << "," << r.summary.total_evaluations;
    } else {
      runs_csv << ",,,,";
    }
    runs_csv << "," << fs::relative(r.dir, out_dir).generic_string() << "\n";
  }
  write_text(out_dir / "sweep_runs.csv", runs_csv.str());
  write_text(out_dir / "sweep_aggregate.csv", sweep_aggregate_csv(axis, result.aggregates));

  if (spec.axis == SweepAxis::batch_size) {
    std::vector<EfficiencyInput> inputs;
    for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
      const auto& agg = result.aggregates[vi];
      if (agg.completed == 0) continue;
      inputs.push_back({"ascii_me", spec.base.env_name, spec.values[vi].get<std::int64_t>(), agg.qd_score.median,
                        agg.runtime_ms.median});
    }
    if (!inputs.empty()) {
      const auto table = efficiency_scores(inputs);
      write_text(out_dir / "efficiency.csv", efficiency_rows_csv(table));
      write_text(out_dir / "efficiency_means.csv", efficiency_means_csv(table));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Reporting

namespace {

struct LoadedRun {
  std::string name;
  RunSummary summary;
  std::vector<IterationReport> reports;
};

std::string algorithm_label(const json& config) {
  const double ga = config.at("ga_fraction").get<double>();
  const std::string source = config.at("buffer").at("source_mode").get<std::string>();
  return "ga" + format_number(ga) + "_" + source;
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

ReportOutcome report(const fs::path& results_dir, const fs::path& out_dir) {
  ReportOutcome outcome;
  if (!fs::is_directory(results_dir)) {
    throw std::invalid_argument("results directory does not exist: " + results_dir.string());
  }

  std::vector<fs::path> candidates;
  for (const auto& entry : fs::recursive_directory_iterator(results_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename();
    if (name == "summary.json" || name == "reports.jsonl") candidates.push_back(entry.path().parent_path());
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<LoadedRun> runs;
  for (const auto& dir : candidates) {
    const std::string rel = fs::relative(dir, results_dir).generic_string();
    try {
      LoadedRun run;
      run.name = rel;
      std::ifstream summary(dir / "summary.json");
      if (!summary) throw std::runtime_error("missing summary.json");
      run.summary = run_summary_from_json(json::parse(summary));
      std::ifstream jsonl(dir / "reports.jsonl");
      if (!jsonl) throw std::runtime_error("missing reports.jsonl");
      std::string line;
      while (std::getline(jsonl, line)) {
        if (line.empty()) continue;
        run.reports.push_back(iteration_report_from_json(json::parse(line)));
      }
      if (run.reports.empty()) throw std::runtime_error("reports.jsonl has no reports");
      algorithm_label(run.summary.config);
      runs.push_back(std::move(run));
    } catch (const std::exception& e) {
      outcome.problems.push_back(rel + ": " + e.what());
    }
  }
  std::sort(runs.begin(), runs.end(), [](const LoadedRun& a, const LoadedRun& b) { return a.name < b.name; });
  outcome.runs = runs.size();

  fs::create_directories(out_dir);
  auto emit = [&](const std::string& file, const std::string& text) {
    write_text(out_dir / file, text);
    outcome.written.push_back(out_dir / file);
  };

  std::ostringstream by_evals, by_clock, attribution, finals;
  by_evals << csv_schema_line("metrics_vs_evaluations") << "\n"
           << "run,env,evaluations,qd_score,coverage,max_fitness\n";
  by_clock << csv_schema_line("metrics_vs_wall_clock") << "\n"
           << "run,env,wall_clock_ms,qd_score,coverage,max_fitness\n";
  attribution << csv_schema_line("attribution") << "\n"
              << "run,env,iteration,evaluations,cumulative_init,cumulative_isoline,cumulative_ascii\n";
  finals << csv_schema_line("final_summary") << "\n"
         << "run,env,algorithm,batch_size,seed,evaluations,qd_score,coverage,max_fitness,runtime_ms,"
            "added_init,added_isoline,added_ascii\n";

  std::map<std::tuple<std::string, std::string, std::int64_t>, std::pair<std::vector<double>, std::vector<double>>>
      groups;
  for (const auto& run : runs) {
    const std::string& env = run.summary.env;
    OperatorCounts cumulative{};
    for (const auto& r : run.reports) {
      const std::string metrics =
          format_number(r.qd_score) + "," + format_number(r.coverage) + "," + optional_cell(r.max_fitness);
      by_evals << run.name << "," << env << "," << r.evaluations << "," << metrics << "\n";
      by_clock << run.name << "," << env << "," << format_number(r.wall_clock_ms) << "," << metrics << "\n";
      for (std::size_t i = 0; i < cumulative.size(); ++i) cumulative[i] += r.additions[i];
      attribution << run.name << "," << env << "," << r.iteration << "," << r.evaluations << "," << cumulative[0]
                  << "," << cumulative[1] << "," << cumulative[2] << "\n";
    }
    const json& cfg = run.summary.config;
    const std::string algorithm = algorithm_label(cfg);
    const auto batch = cfg.at("batch_size").get<std::int64_t>();
    const auto& s = run.summary;
    finals << run.name << "," << env << "," << algorithm << "," << batch << "," << cfg.at("seed").get<std::uint64_t>()
           << "," << s.total_evaluations << "," << format_number(s.qd_score) << "," << format_number(s.coverage)
           << "," << optional_cell(s.max_fitness) << "," << format_number(s.runtime_ms) << ","
           << s.addition_counters[0] << "," << s.addition_counters[1] << "," << s.addition_counters[2] << "\n";
    auto& g = groups[{algorithm, env, batch}];
    g.first.push_back(s.qd_score);
    g.second.push_back(s.runtime_ms);
  }

  emit("metrics_vs_evaluations.csv", by_evals.str());
  emit("metrics_vs_wall_clock.csv", by_clock.str());
  emit("attribution.csv", attribution.str());
  emit("final_summary.csv", finals.str());

  EfficiencyTable table;
  if (!groups.empty()) {
    std::vector<EfficiencyInput> inputs;
    for (const auto& [key, vals] : groups) {
      inputs.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), quantile(vals.first, 0.5),
                        quantile(vals.second, 0.5)});
    }
    table = efficiency_scores(inputs);
  }
  emit("efficiency.csv", efficiency_rows_csv(table));
  emit("efficiency_means.csv", efficiency_means_csv(table));
  return outcome;
}

}  // namespace ascii_me
