#pragma once

#include <cstdint>

#include "ascii_me/policy_network.hpp"

namespace ascii_me {

/// Evaluation record of a mutated genotype with its rewards replaced by
/// rewards-to-go. Column t holds time step t.
struct Trajectory {
  Matrix states;         // state_dim x H
  Matrix actions;        // action_dim x H
  Vector rewards_to_go;  // H
  std::int64_t source_iteration = 0;

  std::size_t horizon() const noexcept { return static_cast<std::size_t>(states.cols()); }
};

}  // namespace ascii_me
