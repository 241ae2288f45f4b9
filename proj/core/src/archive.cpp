#include "ascii_me/archive.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "binary_io.hpp"

namespace ascii_me {

namespace {

void validate_bounds(const Bounds& bounds) {
  if (bounds.lower.size() == 0 || bounds.lower.size() != bounds.upper.size()) {
    throw std::invalid_argument("bounds must be non-empty and have matching lower/upper sizes");
  }
  for (Eigen::Index i = 0; i < bounds.lower.size(); ++i) {
    if (!(bounds.lower[i] < bounds.upper[i])) {
      throw std::invalid_argument("degenerate bounds on dimension " + std::to_string(i));
    }
  }
}

std::size_t nearest(const Matrix& points, const double* x, Eigen::Index dim) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  const double* p = points.data();
  for (Eigen::Index c = 0; c < points.cols(); ++c, p += dim) {
    double d = 0.0;
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double diff = p[k] - x[k];
      d += diff * diff;
    }
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<std::size_t>(c);
    }
  }
  return best;
}

}  // namespace

Centroids generate_centroids(std::size_t count, const Bounds& bounds, std::uint64_t seed,
                             const CentroidOptions& options) {
  if (count == 0) throw std::invalid_argument("number of centroids must be >= 1");
  validate_bounds(bounds);
  const Eigen::Index dim = bounds.lower.size();
  const std::size_t n_samples = std::max<std::size_t>(options.samples_per_centroid, 1) * count;

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix samples(dim, static_cast<Eigen::Index>(n_samples));
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    for (Eigen::Index k = 0; k < dim; ++k) {
      samples(k, j) = bounds.lower[k] + (bounds.upper[k] - bounds.lower[k]) * unit(rng);
    }
  }

  Matrix centers = samples.leftCols(static_cast<Eigen::Index>(count));
  std::vector<std::size_t> assignment(n_samples, count);
  Matrix sums(dim, static_cast<Eigen::Index>(count));
  std::vector<std::size_t> counts(count);

  // Centers stored transposed so each distance pass vectorizes over centers.
  Matrix centers_t;
  Eigen::ArrayXd dist(static_cast<Eigen::Index>(count));
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    bool changed = false;
    centers_t = centers.transpose();
    for (std::size_t j = 0; j < n_samples; ++j) {
      const auto x = samples.col(static_cast<Eigen::Index>(j));
      dist = (centers_t.col(0).array() - x[0]).square();
      for (Eigen::Index k = 1; k < dim; ++k) dist += (centers_t.col(k).array() - x[k]).square();
      // minCoeff without an index vectorizes; the first match is the lowest index.
      const double best = dist.minCoeff();
      Eigen::Index c = 0;
      while (dist[c] != best) ++c;
      if (static_cast<std::size_t>(c) != assignment[j]) {
        assignment[j] = static_cast<std::size_t>(c);
        changed = true;
      }
    }
    if (!changed) break;
    sums.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t j = 0; j < n_samples; ++j) {
      sums.col(static_cast<Eigen::Index>(assignment[j])) += samples.col(static_cast<Eigen::Index>(j));
      ++counts[assignment[j]];
    }
    for (std::size_t c = 0; c < count; ++c) {
      // Empty clusters keep their previous center.
      if (counts[c] > 0) {
        centers.col(static_cast<Eigen::Index>(c)) =
            sums.col(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
      }
    }
  }
  return Centroids{std::move(centers)};
}

Centroids grid_centroids(std::size_t per_dim, const Bounds& bounds) {
  if (per_dim == 0) throw std::invalid_argument("grid needs at least one cell per dimension");
  validate_bounds(bounds);
  const Eigen::Index dim = bounds.lower.size();
  std::size_t total = 1;
  for (Eigen::Index k = 0; k < dim; ++k) total *= per_dim;
  Matrix points(dim, static_cast<Eigen::Index>(total));
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rem = c;
    for (Eigen::Index k = 0; k < dim; ++k) {
      const std::size_t idx = rem % per_dim;
      rem /= per_dim;
      const double width = (bounds.upper[k] - bounds.lower[k]) / static_cast<double>(per_dim);
      points(k, static_cast<Eigen::Index>(c)) = bounds.lower[k] + (static_cast<double>(idx) + 0.5) * width;
    }
  }
  return Centroids{std::move(points)};
}

Centroids cached_centroids(const std::filesystem::path& cache_dir, std::size_t count,
                           const Bounds& bounds, std::uint64_t seed, const CentroidOptions& options) {
  validate_bounds(bounds);
  std::string key = "cvt_C" + std::to_string(count) + "_s" + std::to_string(seed) + "_n" +
                    std::to_string(options.samples_per_centroid) + "_i" +
                    std::to_string(options.max_iterations);
  for (Eigen::Index k = 0; k < bounds.lower.size(); ++k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "_%.6g_%.6g", bounds.lower[k], bounds.upper[k]);
    key += buf;
  }
  const auto path = cache_dir / (key + ".json");
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (!j.is_discarded() && j.contains("points")) {
      const auto rows = j.at("points").get<std::vector<std::vector<double>>>();
      if (rows.size() == count) {
        Matrix points(bounds.lower.size(), static_cast<Eigen::Index>(count));
        bool ok = true;
        for (std::size_t c = 0; c < count && ok; ++c) {
          ok = rows[c].size() == static_cast<std::size_t>(bounds.lower.size());
          for (std::size_t k = 0; ok && k < rows[c].size(); ++k) {
            points(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = rows[c][k];
          }
        }
        if (ok) return Centroids{std::move(points)};
      }
    }
  }
  Centroids centroids = generate_centroids(count, bounds, seed, options);
  std::filesystem::create_directories(cache_dir);
  nlohmann::json j;
  j["points"] = nlohmann::json::array();
  for (Eigen::Index c = 0; c < centroids.points.cols(); ++c) {
    const Vector col = centroids.points.col(c);
    j["points"].push_back(std::vector<double>(col.begin(), col.end()));
  }
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << j.dump();
  }
  std::filesystem::rename(tmp, path);
  return centroids;
}

std::size_t cell_index(const Centroids& centroids, const Eigen::Ref<const Vector>& descriptor) {
  if (static_cast<std::size_t>(descriptor.size()) != centroids.dim()) {
    throw std::invalid_argument("descriptor dimension does not match centroids");
  }
  const Vector d = descriptor;
  return nearest(centroids.points, d.data(), d.size());
}

std::string to_string(OperatorTag tag) {
  switch (tag) {
    case OperatorTag::init:
      return "init";
    case OperatorTag::isoline:
      return "isoline";
    case OperatorTag::ascii:
      return "ascii";
  }
  return "unknown";
}

Archive::Archive(Centroids centroids) : centroids_(std::move(centroids)), cells_(centroids_.size()) {
  if (centroids_.size() == 0) throw std::invalid_argument("archive needs at least one centroid");
}

AdditionOutcome Archive::try_add(EliteRecord candidate) {
  const std::size_t idx = cell_index(centroids_, candidate.descriptor);
  auto& slot = cells_[idx];
  AdditionOutcome outcome;
  if (!slot) {
    occupied_.push_back(idx);
    outcome = AdditionOutcome::inserted;
  } else if (slot->fitness < candidate.fitness) {
    outcome = AdditionOutcome::replaced;
  } else {
    return AdditionOutcome::rejected;
  }
  ++counters_[static_cast<std::size_t>(candidate.operator_tag)];
  slot = std::move(candidate);
  return outcome;
}

std::vector<std::size_t> Archive::sample_uniform(std::size_t n, std::uint64_t seed) const {
  Rng rng(seed);
  return sample_uniform(n, rng);
}

std::vector<std::size_t> Archive::sample_uniform(std::size_t n, Rng& rng) const {
  if (occupied_.empty()) throw std::logic_error("cannot sample from an empty archive");
  std::uniform_int_distribution<std::size_t> pick(0, occupied_.size() - 1);
  std::vector<std::size_t> out(n);
  for (auto& o : out) o = occupied_[pick(rng)];
  return out;
}

ArchiveMetrics Archive::metrics() const {
  ArchiveMetrics m;
  for (std::size_t idx : occupied_) {
    const double f = cells_[idx]->fitness;
    m.qd_score += f;
    if (!m.max_fitness || f > *m.max_fitness) m.max_fitness = f;
  }
  m.coverage = 100.0 * static_cast<double>(occupied_.size()) / static_cast<double>(cells_.size());
  return m;
}

void Archive::write_binary(std::ostream& out, const PolicySpec& spec) const {
  using namespace detail;
  out.write("AMAR", 4);
  write_pod<std::uint32_t>(out, 1);
  write_pod<std::uint64_t>(out, spec.hash());
  write_matrix(out, centroids_.points);
  for (auto c : counters_) write_pod<std::int64_t>(out, c);
  write_pod<std::uint64_t>(out, occupied_.size());
  for (std::size_t idx : occupied_) {
    const EliteRecord& e = *cells_[idx];
    write_pod<std::uint64_t>(out, idx);
    write_pod<double>(out, e.fitness);
    write_pod<std::int64_t>(out, e.birth_iteration);
    write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(e.operator_tag));
    write_vector(out, e.descriptor);
    write_vector(out, e.genotype.params());
    write_matrix(out, e.states);
    write_vector(out, e.rewards_to_go);
  }
}

Archive Archive::read_binary(std::istream& in, const PolicySpec& spec) {
  using namespace detail;
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "AMAR") throw std::runtime_error("not an archive snapshot");
  if (read_pod<std::uint32_t>(in) != 1) throw std::runtime_error("unsupported archive version");
  if (read_pod<std::uint64_t>(in) != spec.hash()) {
    throw std::runtime_error("archive snapshot was written for a different policy architecture");
  }
  Archive archive(Centroids{read_matrix(in)});
  for (auto& c : archive.counters_) c = read_pod<std::int64_t>(in);
  const auto n = read_pod<std::uint64_t>(in);
  if (n > archive.capacity()) throw std::runtime_error("corrupt archive snapshot");
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto idx = read_pod<std::uint64_t>(in);
    if (idx >= archive.capacity() || archive.cells_[idx]) throw std::runtime_error("corrupt archive snapshot");
    EliteRecord e;
    e.fitness = read_pod<double>(in);
    e.birth_iteration = read_pod<std::int64_t>(in);
    const auto tag = read_pod<std::uint8_t>(in);
    if (tag >= kOperatorCount) throw std::runtime_error("corrupt operator tag");
    e.operator_tag = static_cast<OperatorTag>(tag);
    e.descriptor = read_vector(in);
    e.genotype = Genotype(read_vector(in));
    if (e.genotype.size() != parameter_count(spec)) throw std::runtime_error("corrupt genotype length");
    e.states = read_matrix(in);
    e.rewards_to_go = read_vector(in);
    archive.cells_[idx] = std::move(e);
    archive.occupied_.push_back(idx);
  }
  return archive;
}

std::string Archive::summary_json() const {
  nlohmann::json j;
  const auto m = metrics();
  j["num_cells"] = capacity();
  j["occupied"] = occupied();
  j["qd_score"] = m.qd_score;
  j["coverage"] = m.coverage;
  j["max_fitness"] = m.max_fitness ? nlohmann::json(*m.max_fitness) : nlohmann::json(nullptr);
  j["addition_counters"] = {{"init", counters_[0]}, {"isoline", counters_[1]}, {"ascii", counters_[2]}};
  auto& cells = j["cells"] = nlohmann::json::array();
  for (std::size_t idx = 0; idx < cells_.size(); ++idx) {
    if (!cells_[idx]) continue;
    const auto& e = *cells_[idx];
    cells.push_back({{"index", idx},
                     {"fitness", e.fitness},
                     {"descriptor", std::vector<double>(e.descriptor.begin(), e.descriptor.end())},
                     {"centroid", std::vector<double>(centroids_.points.col(static_cast<Eigen::Index>(idx)).begin(),
                                                      centroids_.points.col(static_cast<Eigen::Index>(idx)).end())},
                     {"operator", to_string(e.operator_tag)},
                     {"birth_iteration", e.birth_iteration}});
  }
  return j.dump();
}

}  // namespace ascii_me
