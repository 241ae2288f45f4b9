#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ascii_me/policy_network.hpp"
#include "ascii_me/rng.hpp"

namespace ascii_me {

/// CVT (or grid) cell centers; column c is centroid c.
struct Centroids {
  Matrix points;  // descriptor_dim x C

  std::size_t size() const noexcept { return static_cast<std::size_t>(points.cols()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(points.rows()); }
};

struct Bounds {
  Vector lower;
  Vector upper;
};

struct CentroidOptions {
  std::size_t samples_per_centroid = 100;
  std::size_t max_iterations = 30;
};

/// Lloyd's k-means over uniform samples in the box. Deterministic per seed.
/// Throws std::invalid_argument when C == 0 or a dimension has min >= max.
Centroids generate_centroids(std::size_t count, const Bounds& bounds, std::uint64_t seed,
                             const CentroidOptions& options = {});

/// Regular grid with `per_dim` cells along each axis; nearest-centroid
/// assignment over grid centers reproduces grid binning.
Centroids grid_centroids(std::size_t per_dim, const Bounds& bounds);

/// Loads centroids from `cache_dir` if present, otherwise generates and
/// stores them. The file name encodes (C, bounds, seed).
Centroids cached_centroids(const std::filesystem::path& cache_dir, std::size_t count,
                           const Bounds& bounds, std::uint64_t seed,
                           const CentroidOptions& options = {});

/// Nearest centroid by Euclidean distance, lowest index on ties.
std::size_t cell_index(const Centroids& centroids, const Eigen::Ref<const Vector>& descriptor);

enum class OperatorTag : std::uint8_t { init = 0, isoline = 1, ascii = 2 };
inline constexpr std::size_t kOperatorCount = 3;

std::string to_string(OperatorTag tag);

struct EliteRecord {
  Genotype genotype;
  double fitness = 0.0;
  Vector descriptor;
  Matrix states;          // state_dim x H, the states of this elite's evaluation
  Vector rewards_to_go;   // H
  std::int64_t birth_iteration = 0;
  OperatorTag operator_tag = OperatorTag::init;
};

enum class AdditionOutcome { inserted, replaced, rejected };

struct ArchiveMetrics {
  double qd_score = 0.0;
  double coverage = 0.0;  // percent of cells occupied
  std::optional<double> max_fitness;
};

using OperatorCounts = std::array<std::int64_t, kOperatorCount>;

/// MAP-Elites container. Insertion is single-writer; const members may be
/// called concurrently between insertion phases.
class Archive {
 public:
  explicit Archive(Centroids centroids);

  const Centroids& centroids() const noexcept { return centroids_; }
  std::size_t capacity() const noexcept { return cells_.size(); }
  std::size_t occupied() const noexcept { return occupied_.size(); }
  bool empty() const noexcept { return occupied_.empty(); }

  const std::optional<EliteRecord>& cell(std::size_t index) const { return cells_.at(index); }

  /// Occupied cell indices in first-insertion order.
  const std::vector<std::size_t>& occupied_cells() const noexcept { return occupied_; }

  /// Inserts into an empty cell, replaces when the candidate is strictly
  /// fitter, otherwise keeps the incumbent.
  AdditionOutcome try_add(EliteRecord candidate);

  /// Cell indices drawn uniformly with replacement from the occupied cells.
  /// Throws std::logic_error on an empty archive.
  std::vector<std::size_t> sample_uniform(std::size_t n, std::uint64_t seed) const;
  std::vector<std::size_t> sample_uniform(std::size_t n, Rng& rng) const;

  ArchiveMetrics metrics() const;

  /// Successful insertions + replacements per operator tag.
  const OperatorCounts& addition_counters() const noexcept { return counters_; }

  /// Binary snapshot: centroids, counters and every elite.
  void write_binary(std::ostream& out, const PolicySpec& spec) const;
  static Archive read_binary(std::istream& in, const PolicySpec& spec);

  /// Per-cell fitness/descriptor summary for plotting.
  std::string summary_json() const;

 private:
  Centroids centroids_;
  std::vector<std::optional<EliteRecord>> cells_;
  std::vector<std::size_t> occupied_;
  OperatorCounts counters_{};
};

}  // namespace ascii_me
