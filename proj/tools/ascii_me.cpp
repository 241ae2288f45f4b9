#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ascii_me/bench.hpp"
#include "ascii_me/config.hpp"
#include "ascii_me/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kPartialSweep = 3, kNothingToReport = 4 };

fs::path output_root() {
  const char* env = std::getenv("ASCII_ME_OUTPUT_ROOT");
  return env && *env ? fs::path(env) : fs::path("results");
}

struct ConfigArgs {
  std::string config;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("-s,--set", overrides, "Override a config key, e.g. --set operators.ascii.alpha=0.01");
  }
  ascii_me::RunConfig resolve() const { return ascii_me::resolve_run_config(config, overrides); }
};

std::vector<json> parse_values(const std::vector<std::string>& raw) {
  std::vector<json> out;
  for (const auto& text : raw) {
    json v = json::parse(text, nullptr, false);
    out.push_back(v.is_discarded() ? json(text) : v);
  }
  return out;
}

void print_summary(const ascii_me::RunSummary& s) {
  std::cout << "evaluations " << s.total_evaluations << "  qd_score " << ascii_me::format_number(s.qd_score)
            << "  coverage " << ascii_me::format_number(s.coverage) << "%  max_fitness "
            << (s.max_fitness ? ascii_me::format_number(*s.max_fitness) : "-") << "  runtime "
            << ascii_me::format_number(s.runtime_ms / 1000.0) << " s\n";
}

int sweep(const ascii_me::SweepSpec& spec, const fs::path& out) {
  std::cout << "sweeping " << ascii_me::to_string(spec.axis) << " over " << spec.values.size() << " value(s) x "
            << spec.seeds.size() << " seed(s) into " << out << "\n";
  if (spec.parallel_runs) std::cerr << "warning: runs execute concurrently; runtimes are not comparable\n";
  const auto result = ascii_me::run_sweep(spec, out);
  for (const auto& a : result.aggregates) {
    std::cout << ascii_me::to_string(spec.axis) << "=" << a.value << "  completed " << a.completed;
    if (a.completed > 0) {
      std::cout << "  qd median " << ascii_me::format_number(a.qd_score.median) << " [" << ascii_me::format_number(a.qd_score.q1)
                << ", " << ascii_me::format_number(a.qd_score.q3) << "]  coverage median "
                << ascii_me::format_number(a.coverage.median);
    }
    std::cout << "\n";
  }
  for (const auto& r : result.runs) {
    if (!r.ok) std::cerr << "run " << r.value << " seed " << r.seed << " failed: " << r.error << "\n";
  }
  return result.failures() > 0 ? kPartialSweep : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ASCII-ME quality-diversity neuroevolution"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "Run one configuration");
  ConfigArgs run_args;
  run_args.attach(run_cmd);
  std::string run_out, run_name;
  run_cmd->add_option("-o,--out", run_out, "Run directory (default: <output root>/<name>)");
  run_cmd->add_option("-n,--name", run_name, "Run name under the output root");

  // sweep and ablations
  struct SweepArgs {
    ConfigArgs config;
    std::string axis = "batch_size";
    std::vector<std::string> values;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::string out;
    bool parallel = false;
  };
  auto attach_sweep = [](CLI::App* cmd, SweepArgs& a, bool with_axis, std::vector<std::string> default_values) {
    a.config.attach(cmd);
    a.values = std::move(default_values);
    if (with_axis) {
      cmd->add_option("-a,--axis", a.axis, "batch_size, ga_fraction or source_mode")->capture_default_str();
      cmd->add_option("-v,--values", a.values, "Values of the swept key")->delimiter(',')->required();
    } else {
      cmd->add_option("-v,--values", a.values, "Values of the swept key")->delimiter(',')->capture_default_str();
    }
    cmd->add_option("--seeds", a.seeds, "Seeds, one run per seed and value")->delimiter(',')->capture_default_str();
    cmd->add_option("-o,--out", a.out, "Sweep directory (default: <output root>/<subcommand>)");
    cmd->add_flag("--parallel-runs", a.parallel, "Run configurations concurrently (runtimes become non-comparable)");
  };
  SweepArgs sweep_args, ga_args, source_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one key over values and seeds");
  attach_sweep(sweep_cmd, sweep_args, true, {});
  auto* ga_cmd = app.add_subcommand("ablate-ga", "Sweep the Iso+LineDD share of each batch");
  attach_sweep(ga_cmd, ga_args, false, {"0", "0.25", "0.5", "0.75", "1.0"});
  ga_args.axis = "ga_fraction";
  auto* source_cmd = app.add_subcommand("ablate-source", "Compare replay-buffer and archive ASCII targets");
  attach_sweep(source_cmd, source_args, false, {"buffer", "archive"});
  source_args.axis = "source_mode";

  // centroids
  auto* centroids_cmd = app.add_subcommand("centroids", "Generate the archive centroids for a configuration");
  ConfigArgs centroid_args;
  centroid_args.attach(centroids_cmd);
  std::string centroid_out;
  centroids_cmd->add_option("-o,--out", centroid_out, "Output JSON file (default: stdout)");

  // report
  auto* report_cmd = app.add_subcommand("report", "Summarize a directory of completed runs");
  std::string report_in, report_out;
  report_cmd->add_option("results_dir", report_in, "Directory containing run directories")->required();
  report_cmd->add_option("-o,--out", report_out, "Directory for the tables (default: <results_dir>/report)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const auto config = run_args.resolve();
      if (run_name.empty()) run_name = "run_" + config.env_name + "_seed" + std::to_string(config.seed);
      const fs::path dir = run_out.empty() ? output_root() / run_name : fs::path(run_out);
      std::cout << "running " << config.env_name << " into " << dir << "\n";
      print_summary(ascii_me::run_to_directory(config, dir));
      return kOk;
    }
    for (auto [cmd, args, name] : {std::tuple{sweep_cmd, &sweep_args, "sweep"}, std::tuple{ga_cmd, &ga_args, "ablate-ga"},
                                   std::tuple{source_cmd, &source_args, "ablate-source"}}) {
      if (!cmd->parsed()) continue;
      ascii_me::SweepSpec spec;
      spec.base = args->config.resolve();
      spec.axis = ascii_me::sweep_axis_from_string(args->axis);
      spec.values = parse_values(args->values);
      spec.seeds = args->seeds;
      spec.parallel_runs = args->parallel;
      return sweep(spec, args->out.empty() ? output_root() / name : fs::path(args->out));
    }
    if (centroids_cmd->parsed()) {
      const auto config = centroid_args.resolve();
      const auto env = ascii_me::make_environment(config.env_name, config.env_overrides);
      const auto c = ascii_me::make_centroids(config.archive, env->spec());
      json points = json::array();
      for (Eigen::Index i = 0; i < c.points.cols(); ++i) {
        points.push_back(std::vector<double>(c.points.col(i).data(), c.points.col(i).data() + c.points.rows()));
      }
      const json doc = {{"env", config.env_name}, {"count", c.size()}, {"dim", c.dim()},
                        {"seed", config.archive.centroid_seed}, {"points", points}};
      if (centroid_out.empty()) {
        std::cout << doc.dump() << "\n";
      } else {
        std::ofstream(centroid_out) << doc.dump() << "\n";
      }
      return kOk;
    }
    if (report_cmd->parsed()) {
      const fs::path out = report_out.empty() ? fs::path(report_in) / "report" : fs::path(report_out);
      const auto outcome = ascii_me::report(report_in, out);
      for (const auto& p : outcome.problems) std::cerr << "skipped " << p << "\n";
      std::cout << outcome.runs << " run(s) reported into " << out << "\n";
      return outcome.runs == 0 ? kNothingToReport : kOk;
    }
  } catch (const ascii_me::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
