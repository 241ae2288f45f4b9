#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ascii_me/archive.hpp"
#include "ascii_me/environments.hpp"
#include "ascii_me/replay_buffer.hpp"
#include "ascii_me/variation_operators.hpp"
#include "ascii_me/worker_pool.hpp"

namespace ascii_me {

/// Invalid run configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ArchiveKind { cvt, grid };

struct ArchiveConfig {
  ArchiveKind kind = ArchiveKind::cvt;
  std::size_t num_centroids = 1024;
  std::size_t grid_per_dim = 32;  // grid kind only
  std::uint64_t centroid_seed = 0;
  CentroidOptions cvt;
  std::string cache_dir;  // empty disables the centroid cache
};

struct PolicyConfig {
  std::vector<std::size_t> hidden_layers{64, 64};
  Activation activation = Activation::tanh;
  bool output_squash = true;
};

struct RunConfig {
  std::string env_name = "point_trap_omni";
  nlohmann::json env_overrides = nlohmann::json::object();
  PolicyConfig policy;
  std::size_t batch_size = 4096;
  double ga_fraction = 0.5;
  std::size_t eval_budget = 50'000;
  std::uint64_t seed = 0;
  std::size_t worker_count = 1;
  IsoLineConfig isoline;
  AsciiConfig ascii;
  BufferConfig buffer;
  ArchiveConfig archive;
  std::size_t checkpoint_every = 0;  // iterations; 0 disables

  /// Throws ConfigError.
  void validate() const;

  /// Number of Iso+LineDD offspring per batch (the rest use ASCII).
  std::size_t ga_count() const;
};

struct IterationReport {
  std::int64_t iteration = 0;
  std::size_t evaluations = 0;
  double qd_score = 0.0;
  double coverage = 0.0;
  std::optional<double> max_fitness;
  OperatorCounts additions{};  // archive additions made in this iteration
  double iteration_ms = 0.0;
  double wall_clock_ms = 0.0;  // since the start of the run
};

struct RunResult {
  Archive archive;
  std::vector<IterationReport> reports;
  PolicySpec policy;
  EnvSpec env;
  AsciiDiagnostics ascii_diagnostics;
  std::size_t ascii_buffer_fallbacks = 0;  // iterations that sourced targets from the archive
  std::size_t truncated_rollouts = 0;
  std::size_t total_evaluations = 0;
  double runtime_ms = 0.0;
};

struct RunCallbacks {
  std::function<void(const IterationReport&)> on_report;
  std::function<void(const Archive&, const PolicySpec&, std::int64_t iteration)> on_checkpoint;
};

/// Evaluates each genotype with its seed; result i belongs to input i.
std::vector<Rollout> evaluate_batch(const Environment& env, const PolicySpec& spec,
                                    std::span<const Genotype> genotypes,
                                    std::span<const std::uint64_t> seeds, WorkerPool& pool);

/// Builds the archive's centroids for an environment's descriptor space.
Centroids make_centroids(const ArchiveConfig& cfg, const EnvSpec& env);

/// The full MAP-Elites loop with the split Iso+LineDD / ASCII variation.
RunResult run(const RunConfig& config, const RunCallbacks& callbacks = {});

}  // namespace ascii_me
