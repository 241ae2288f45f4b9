#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ascii_me/scheduler.hpp"

namespace ascii_me {

/// Run configuration as a JSON document. Layout:
///
///   env.name, env.<parameter>          environment and its overrides
///   policy.{hidden_layers, activation, output_squash}
///   batch_size, ga_fraction, eval_budget, seed, worker_count
///   operators.isoline.{sigma1, sigma2}
///   operators.ascii.{iterations, alpha, sigma_sq, epsilon, b, gamma, lambda1}
///   buffer.{capacity_transitions, source_mode}
///   archive.{kind, num_centroids, grid_per_dim, centroid_seed,
///            samples_per_centroid, max_iterations, cache_dir}
///   output.checkpoint_every
nlohmann::json to_json(const RunConfig& config);

/// Unknown keys and type errors raise ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);

nlohmann::json load_json_file(const std::filesystem::path& path);

/// Applies a `dotted.key=value` override. The value is parsed as JSON when
/// possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Base document (defaults, or the file when given) plus overrides.
RunConfig resolve_run_config(const std::string& config_path, const std::vector<std::string>& overrides);

}  // namespace ascii_me
