#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ascii_me {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Activation { tanh, relu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Architecture of a deterministic MLP policy.
///
/// Genotype layout is layer-major: for each layer, the weight matrix
/// (fan_out x fan_in, row-major) followed by the bias (fan_out).
struct PolicySpec {
  std::size_t state_dim = 1;
  std::size_t action_dim = 1;
  std::vector<std::size_t> hidden_layers{64, 64};
  Activation activation = Activation::tanh;
  bool output_squash = true;

  /// Throws std::invalid_argument on zero-sized dimensions.
  void validate() const;

  /// Layer widths including input and output: [state_dim, hidden..., action_dim].
  std::vector<std::size_t> widths() const;

  /// Stable 64-bit hash of the architecture, used to tag serialized genotypes.
  std::uint64_t hash() const;

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

std::size_t parameter_count(const PolicySpec& spec);

/// Flat real-valued parameter vector. Length is fixed at construction and
/// every entry is finite.
class Genotype {
 public:
  Genotype() = default;
  explicit Genotype(Vector params);
  explicit Genotype(std::vector<double> params);

  std::size_t size() const noexcept { return static_cast<std::size_t>(params_.size()); }
  const Vector& params() const noexcept { return params_; }
  std::span<const double> span() const noexcept { return {params_.data(), size()}; }

  friend bool operator==(const Genotype& a, const Genotype& b) {
    return a.params_.size() == b.params_.size() && a.params_ == b.params_;
  }

 private:
  Vector params_;
};

Genotype init_genotype(const PolicySpec& spec, std::uint64_t seed);

/// Single-state forward pass.
Vector forward(const PolicySpec& spec, const Genotype& g, const Eigen::Ref<const Vector>& state);

/// Batched forward pass; column t of `states` is one state. Returns
/// action_dim x T.
Matrix forward_batch(const PolicySpec& spec, const Genotype& g,
                     const Eigen::Ref<const Matrix>& states);

/// Reverse-mode vector-Jacobian product: (d mu_x(s) / d x)^T c.
Vector vjp(const PolicySpec& spec, const Genotype& g, const Eigen::Ref<const Vector>& state,
           const Eigen::Ref<const Vector>& cotangent);

/// Sum over columns t of vjp(g, states[:, t], cotangents[:, t]), computed in
/// one batched backward pass.
Vector vjp_sum(const PolicySpec& spec, const Genotype& g, const Eigen::Ref<const Matrix>& states,
               const Eigen::Ref<const Matrix>& cotangents);

/// Keeps the activations of a batched forward pass so a backward pass can
/// reuse them. Buffers are retained across calls.
class PolicyTape {
 public:
  explicit PolicyTape(const PolicySpec& spec);

  /// Returns action_dim x T actions for the state columns.
  const Matrix& forward(const Genotype& g, const Eigen::Ref<const Matrix>& states);

  /// Sum of per-column vjps at the states of the last forward() call, which
  /// must have used the same genotype.
  Vector backward(const Genotype& g, const Eigen::Ref<const Matrix>& cotangents);

  const PolicySpec& spec() const noexcept { return spec_; }

 private:
  PolicySpec spec_;
  std::vector<std::size_t> widths_;
  Matrix input_;
  std::vector<Matrix> activations_;  // post-activation output of each layer
  Matrix delta_;
  Matrix delta_prev_;
};

// Serialization: little-endian binary ("AMGT", version, spec hash, count,
// doubles) and a JSON document for debugging.
void write_genotype_binary(std::ostream& out, const PolicySpec& spec, const Genotype& g);
Genotype read_genotype_binary(std::istream& in, const PolicySpec& spec);
std::string genotype_to_json(const PolicySpec& spec, const Genotype& g);

}  // namespace ascii_me
