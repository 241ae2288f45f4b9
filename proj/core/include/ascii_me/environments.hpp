#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ascii_me/policy_network.hpp"

namespace ascii_me {

struct EnvSpec {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::size_t horizon = 100;
  std::size_t descriptor_dim = 0;
  Vector descriptor_lower;
  Vector descriptor_upper;
  double init_noise_std = 0.0;
};

/// One episode. Column t of `states` is the state the t-th action was taken
/// in; `final_state` is the state after the last step.
struct Rollout {
  Matrix states;   // state_dim x H
  Matrix actions;  // action_dim x H
  Vector rewards;  // H, rewards[t] is the reward received after action t
  Vector final_state;
  double fitness = 0.0;
  Vector descriptor;
  /// Set when the dynamics produced a non-finite value; the remaining steps
  /// are padded and the rollout counts as fitness 0.
  bool truncated = false;
};

struct StepResult {
  Vector next_state;
  double reward = 0.0;
};

/// A deterministic episodic MDP with a fixed horizon. Implementations are
/// immutable after construction, so a single instance is shared by all
/// workers.
class Environment {
 public:
  virtual ~Environment() = default;

  const EnvSpec& spec() const noexcept { return spec_; }

  /// Initial state before noise is added.
  virtual Vector nominal_state() const = 0;

  /// Actions are clipped to [-1, 1] per component before use.
  virtual StepResult step(const Vector& state, const Vector& action) const = 0;

  /// Descriptor of a full episode, clipped to the descriptor bounds.
  virtual Vector descriptor(const Vector& final_state, const Matrix& actions) const = 0;

  /// Parameters in effect (defaults merged with overrides).
  virtual nlohmann::json parameters() const = 0;

 protected:
  explicit Environment(EnvSpec spec) : spec_(std::move(spec)) {}
  Vector clip_descriptor(Vector d) const;
  EnvSpec spec_;
};

/// Names accepted by make_environment().
std::vector<std::string> environment_names();

/// Builds an environment by name. `overrides` may set "horizon",
/// "init_noise_std" and any of the environment's own parameters; unknown
/// keys are rejected.
std::unique_ptr<Environment> make_environment(const std::string& name,
                                              const nlohmann::json& overrides = nlohmann::json::object());

/// Runs one episode of exactly H steps.
Rollout rollout(const Environment& env, const PolicySpec& spec, const Genotype& g, std::uint64_t seed);

/// Policy architecture matching an environment's state and action sizes.
PolicySpec policy_spec_for(const Environment& env, std::vector<std::size_t> hidden_layers = {64, 64},
                           Activation activation = Activation::tanh, bool output_squash = true);

}  // namespace ascii_me
