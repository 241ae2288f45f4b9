#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ascii_me/archive.hpp"
#include "ascii_me/rng.hpp"
#include "ascii_me/trajectory.hpp"

namespace ascii_me {

/// Where ASCII targets come from.
enum class SourceMode { buffer, archive };

std::string to_string(SourceMode mode);
SourceMode source_mode_from_string(const std::string& name);

struct BufferConfig {
  std::size_t capacity_transitions = 1'024'000;
  SourceMode source_mode = SourceMode::buffer;

  /// Whole trajectories that fit, at least one.
  std::size_t capacity_trajectories(std::size_t horizon) const;
};

/// FIFO ring of whole trajectories. Insertion is single-writer; sampling is
/// read-only.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t horizon);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return ring_.size(); }
  bool empty() const noexcept { return ring_.empty(); }
  std::size_t horizon() const noexcept { return horizon_; }
  std::uint64_t total_inserted() const noexcept { return total_inserted_; }

  /// Overwrites the oldest trajectory once full. Throws on a horizon mismatch.
  void insert(Trajectory t);

  /// Uniform with replacement. Throws std::logic_error when empty.
  std::vector<std::size_t> sample(std::size_t n, std::uint64_t seed) const;
  std::vector<std::size_t> sample(std::size_t n, Rng& rng) const;

  /// Slot access; slots are stable until overwritten.
  const Trajectory& at(std::size_t slot) const { return ring_.at(slot); }

  /// Insertion sequence number (0-based) of the trajectory in `slot`.
  std::uint64_t sequence_of(std::size_t slot) const;

 private:
  std::size_t capacity_;
  std::size_t horizon_;
  std::vector<Trajectory> ring_;
  std::size_t write_cursor_ = 0;
  std::uint64_t total_inserted_ = 0;
};

/// Target built from an archive elite: its stored states and rewards-to-go,
/// with actions recomputed by forward passes of the elite's own policy.
Trajectory trajectory_from_elite(const EliteRecord& elite, const PolicySpec& spec);

}  // namespace ascii_me
