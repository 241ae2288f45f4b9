#include "ascii_me/replay_buffer.hpp"

#include <algorithm>
#include <stdexcept>

namespace ascii_me {

std::string to_string(SourceMode mode) { return mode == SourceMode::buffer ? "buffer" : "archive"; }

SourceMode source_mode_from_string(const std::string& name) {
  if (name == "buffer") return SourceMode::buffer;
  if (name == "archive") return SourceMode::archive;
  throw std::invalid_argument("unknown source mode '" + name + "' (expected buffer or archive)");
}

std::size_t BufferConfig::capacity_trajectories(std::size_t horizon) const {
  if (horizon == 0) throw std::invalid_argument("horizon must be >= 1");
  return std::max<std::size_t>(1, capacity_transitions / horizon);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t horizon)
    : capacity_(capacity), horizon_(horizon) {
  if (capacity == 0) throw std::invalid_argument("buffer capacity must be >= 1");
  if (horizon == 0) throw std::invalid_argument("buffer horizon must be >= 1");
  ring_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::insert(Trajectory t) {
  if (t.horizon() != horizon_ || static_cast<std::size_t>(t.actions.cols()) != horizon_ ||
      static_cast<std::size_t>(t.rewards_to_go.size()) != horizon_) {
    throw std::invalid_argument("trajectory horizon does not match buffer horizon");
  }
  if (ring_.size() < capacity_) {
    ring_.push_back(std::move(t));
  } else {
    ring_[write_cursor_] = std::move(t);
  }
  write_cursor_ = (write_cursor_ + 1) % capacity_;
  ++total_inserted_;
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t n, std::uint64_t seed) const {
  Rng rng(seed);
  return sample(n, rng);
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (ring_.empty()) throw std::logic_error("cannot sample from an empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, ring_.size() - 1);
  std::vector<std::size_t> out(n);
  for (auto& o : out) o = pick(rng);
  return out;
}

std::uint64_t ReplayBuffer::sequence_of(std::size_t slot) const {
  if (slot >= ring_.size()) throw std::out_of_range("buffer slot out of range");
  if (ring_.size() < capacity_) return slot;
  // Once full, write_cursor_ points at the oldest element.
  const std::uint64_t oldest = total_inserted_ - capacity_;
  const std::size_t age = (slot + capacity_ - write_cursor_) % capacity_;
  return oldest + age;
}

Trajectory trajectory_from_elite(const EliteRecord& elite, const PolicySpec& spec) {
  Trajectory t;
  t.states = elite.states;
  t.actions = forward_batch(spec, elite.genotype, elite.states);
  t.rewards_to_go = elite.rewards_to_go;
  t.source_iteration = elite.birth_iteration;
  return t;
}

}  // namespace ascii_me
