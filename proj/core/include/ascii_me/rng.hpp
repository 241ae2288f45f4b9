#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ascii_me {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent seed from a root seed and a tuple of counters.
/// Streams are a pure function of the counters, so the assignment of work
/// to threads never changes what a slot draws.
constexpr std::uint64_t derive_seed(std::uint64_t root,
                                    std::initializer_list<std::uint64_t> counters) noexcept {
  std::uint64_t h = mix64(root);
  for (auto c : counters) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

enum class Stream : std::uint64_t {
  init_genotype = 1,
  selection = 2,
  mutation = 3,
  rollout = 4,
};

inline std::uint64_t stream_seed(std::uint64_t run_seed, Stream stream, std::uint64_t iteration,
                                 std::uint64_t slot) noexcept {
  return derive_seed(run_seed, {static_cast<std::uint64_t>(stream), iteration, slot});
}

}  // namespace ascii_me
