#pragma once

#include <cstdint>

#include "ascii_me/policy_network.hpp"
#include "ascii_me/trajectory.hpp"

namespace ascii_me {

struct IsoLineConfig {
  double sigma1 = 0.005;
  double sigma2 = 0.05;

  void validate() const;
};

struct AsciiConfig {
  std::size_t iterations = 32;  // e
  double alpha = 3e-3;          // learning rate
  double sigma_sq = 4.0;        // action kernel variance
  double epsilon = 0.8;         // kernel clip threshold
  double b = 0.25;              // cosine similarity floor
  double gamma = 0.99;          // discount for rewards-to-go
  double lambda1 = 0.0;         // isotropic action noise; only 0 is supported

  void validate() const;

  /// Step size alpha / (H * sigma^2). Always derived, never stored.
  double lambda2(std::size_t horizon) const;
};

/// x_i + sigma1 * N(0, I) + sigma2 * (x_j - x_i) * N(0, 1). The isotropic
/// vector is drawn first, then the single line scalar.
Genotype isoline_dd(const Genotype& x_i, const Genotype& x_j, const IsoLineConfig& cfg,
                    std::uint64_t seed);

/// G_t = r_{t+1} + gamma * G_{t+1} with G_{H-1} = r_H, where rewards[t]
/// holds r_{t+1}.
Vector rewards_to_go(const Eigen::Ref<const Vector>& rewards, double gamma);

/// Parts of the weight computation that depend only on the stored
/// trajectories: the rewards-to-go gap and the floored state cosine.
struct StaticWeightTerms {
  Vector delta_g;  // G^j_t - G^i_t
  Vector cosine;   // max(b, cos(s^i_t, s^j_t)), or b when a state has zero norm
  std::size_t degenerate_states = 0;
};

StaticWeightTerms static_weight_terms(const Eigen::Ref<const Matrix>& parent_states,
                                      const Eigen::Ref<const Vector>& parent_rtg,
                                      const Eigen::Ref<const Matrix>& target_states,
                                      const Eigen::Ref<const Vector>& target_rtg,
                                      const AsciiConfig& cfg);

/// Per-step weights z_t (one scalar per step, applied to every action
/// dimension), with the intermediate factors kept for inspection.
struct WeightVector {
  Vector kernel;  // exp(-|a^j_t - a~_t|^2 / (2 sigma^2))
  Vector beta;    // kernel * cosine * delta_g
  Vector z;       // 0 where kernel < epsilon and delta_g < 0, beta otherwise
};

WeightVector weight_vector(const StaticWeightTerms& terms,
                           const Eigen::Ref<const Matrix>& target_actions,
                           const Eigen::Ref<const Matrix>& imagined_actions, const AsciiConfig& cfg);

WeightVector weight_vector(const Eigen::Ref<const Matrix>& parent_states,
                           const Eigen::Ref<const Vector>& parent_rtg, const Trajectory& target,
                           const Eigen::Ref<const Matrix>& imagined_actions, const AsciiConfig& cfg);

/// What the parent contributes to an ASCII mutation.
struct AsciiParent {
  const Genotype& genotype;
  const Matrix& states;         // states visited in the parent's evaluation
  const Vector& rewards_to_go;  // and their rewards-to-go
};

struct AsciiDiagnostics {
  std::size_t nonfinite_aborts = 0;
  std::size_t degenerate_states = 0;
};

/// Runs `cfg.iterations` steps of
///   x <- x + lambda2 * sum_t vjp(x, s^j_t, z_t (a^j_t - mu_x(s^j_t)))
/// re-evaluating the imagined actions and the kernel/clip each step. On a
/// non-finite update the parent is returned unchanged and
/// `diagnostics.nonfinite_aborts` is incremented.
Genotype ascii_mutate(const AsciiParent& parent, const Trajectory& target, const PolicySpec& spec,
                      const AsciiConfig& cfg, AsciiDiagnostics* diagnostics = nullptr);

}  // namespace ascii_me
