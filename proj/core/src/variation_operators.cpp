#include "ascii_me/variation_operators.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "ascii_me/rng.hpp"

namespace ascii_me {

void IsoLineConfig::validate() const {
  if (!(sigma1 >= 0.0) || !(sigma2 >= 0.0)) {
    throw std::invalid_argument("isoline sigma1 and sigma2 must be >= 0");
  }
}

void AsciiConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("ascii iterations (e) must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("ascii alpha must be > 0");
  if (!(sigma_sq > 0.0)) throw std::invalid_argument("ascii sigma_sq must be > 0");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("ascii epsilon must be in (0, 1]");
  if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("ascii b must be in [0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("ascii gamma must be in [0, 1]");
  if (lambda1 != 0.0) throw std::invalid_argument("ascii lambda1 must be 0");
}

double AsciiConfig::lambda2(std::size_t horizon) const {
  if (horizon == 0) throw std::invalid_argument("horizon must be >= 1");
  return alpha / (static_cast<double>(horizon) * sigma_sq);
}

Genotype isoline_dd(const Genotype& x_i, const Genotype& x_j, const IsoLineConfig& cfg,
                    std::uint64_t seed) {
  if (x_i.size() != x_j.size()) throw std::invalid_argument("isoline_dd: genotype length mismatch");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector iso(x_i.params().size());
  for (auto& v : iso) v = normal(rng);
  const double line = normal(rng);
  Vector out = x_i.params() + cfg.sigma1 * iso + (cfg.sigma2 * line) * (x_j.params() - x_i.params());
  return Genotype(std::move(out));
}

Vector rewards_to_go(const Eigen::Ref<const Vector>& rewards, double gamma) {
  const Eigen::Index h = rewards.size();
  Vector g(h);
  double acc = 0.0;
  for (Eigen::Index t = h; t-- > 0;) {
    acc = rewards[t] + gamma * acc;
    g[t] = acc;
  }
  return g;
}

StaticWeightTerms static_weight_terms(const Eigen::Ref<const Matrix>& parent_states,
                                      const Eigen::Ref<const Vector>& parent_rtg,
                                      const Eigen::Ref<const Matrix>& target_states,
                                      const Eigen::Ref<const Vector>& target_rtg,
                                      const AsciiConfig& cfg) {
  const Eigen::Index h = target_states.cols();
  if (parent_states.cols() != h || parent_rtg.size() != h || target_rtg.size() != h ||
      parent_states.rows() != target_states.rows()) {
    throw std::invalid_argument("parent and target sequences must share horizon and state size");
  }
  StaticWeightTerms terms;
  terms.delta_g = target_rtg - parent_rtg;
  terms.cosine.resize(h);
  for (Eigen::Index t = 0; t < h; ++t) {
    const double ni = parent_states.col(t).norm();
    const double nj = target_states.col(t).norm();
    if (ni == 0.0 || nj == 0.0) {
      terms.cosine[t] = cfg.b;
      ++terms.degenerate_states;
      continue;
    }
    const double cos = parent_states.col(t).dot(target_states.col(t)) / (ni * nj);
    terms.cosine[t] = std::max(cfg.b, cos);
  }
  return terms;
}

WeightVector weight_vector(const StaticWeightTerms& terms, const Eigen::Ref<const Matrix>& target_actions,
                           const Eigen::Ref<const Matrix>& imagined_actions, const AsciiConfig& cfg) {
  const Eigen::Index h = terms.delta_g.size();
  if (target_actions.cols() != h || imagined_actions.cols() != h ||
      target_actions.rows() != imagined_actions.rows()) {
    throw std::invalid_argument("weight_vector: action sequences do not match the horizon");
  }
  WeightVector w;
  w.kernel = (-(target_actions - imagined_actions).colwise().squaredNorm().transpose() / (2.0 * cfg.sigma_sq))
                 .array()
                 .exp();
  w.beta = w.kernel.cwiseProduct(terms.cosine).cwiseProduct(terms.delta_g);
  w.z.resize(h);
  for (Eigen::Index t = 0; t < h; ++t) {
    w.z[t] = (w.kernel[t] < cfg.epsilon && terms.delta_g[t] < 0.0) ? 0.0 : w.beta[t];
  }
  return w;
}

WeightVector weight_vector(const Eigen::Ref<const Matrix>& parent_states,
                           const Eigen::Ref<const Vector>& parent_rtg, const Trajectory& target,
                           const Eigen::Ref<const Matrix>& imagined_actions, const AsciiConfig& cfg) {
  const auto terms = static_weight_terms(parent_states, parent_rtg, target.states, target.rewards_to_go, cfg);
  return weight_vector(terms, target.actions, imagined_actions, cfg);
}

Genotype ascii_mutate(const AsciiParent& parent, const Trajectory& target, const PolicySpec& spec,
                      const AsciiConfig& cfg, AsciiDiagnostics* diagnostics) {
  const std::size_t horizon = target.horizon();
  if (static_cast<std::size_t>(parent.states.cols()) != horizon ||
      static_cast<std::size_t>(parent.rewards_to_go.size()) != horizon ||
      static_cast<std::size_t>(target.actions.cols()) != horizon ||
      static_cast<std::size_t>(target.rewards_to_go.size()) != horizon) {
    throw std::invalid_argument("ascii_mutate: parent and target horizons differ");
  }
  const auto terms =
      static_weight_terms(parent.states, parent.rewards_to_go, target.states, target.rewards_to_go, cfg);
  if (diagnostics) diagnostics->degenerate_states += terms.degenerate_states;

  const double step = cfg.lambda2(horizon);
  PolicyTape tape(spec);
  Genotype x = parent.genotype;
  Matrix cotangents;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const Matrix& imagined = tape.forward(x, target.states);
    const WeightVector w = weight_vector(terms, target.actions, imagined, cfg);
    if (w.z.isZero(0.0)) continue;
    cotangents = (target.actions - imagined) * w.z.asDiagonal();
    Vector next = x.params() + step * tape.backward(x, cotangents);
    if (!next.allFinite()) {
      if (diagnostics) ++diagnostics->nonfinite_aborts;
      return parent.genotype;
    }
    x = Genotype(std::move(next));
  }
  return x;
}

}  // namespace ascii_me
