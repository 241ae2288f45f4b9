#include "ascii_me/environments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ascii_me/rng.hpp"

namespace ascii_me {

namespace {

using nlohmann::json;

// Defaults merged with user overrides; rejects keys the environment does not know.
json merge_parameters(const std::string& env_name, json defaults, const json& overrides) {
  if (!overrides.is_object()) throw std::invalid_argument("environment overrides must be an object");
  for (const auto& [key, value] : overrides.items()) {
    if (!defaults.contains(key)) {
      throw std::invalid_argument("unknown parameter '" + key + "' for environment " + env_name);
    }
    defaults[key] = value;
  }
  return defaults;
}

Vector clip_actions(const Vector& a) { return a.cwiseMax(-1.0).cwiseMin(1.0); }

// 2D double-integrator point robot inside a U-shaped trap that opens towards
// -x. Difference equations (dt, damping, gain from parameters):
//   v'  = damping * v + dt * gain * a
//   p'  = p + dt * v'
// Motion is resolved one axis at a time: the x move is checked against the
// vertical walls at the old y, then the y move against the horizontal walls
// at the new x. A blocked axis stops just short of the wall and its velocity
// is zeroed. The arena boundary behaves the same way.
// Reward: survival - energy_coeff * |a|^2, non-negative for the defaults.
class PointTrapOmni final : public Environment {
 public:
  static json defaults() {
    return {{"horizon", 100},       {"init_noise_std", 0.05}, {"dt", 0.1},
            {"damping", 0.9},       {"gain", 0.5},            {"arena_half_size", 3.0},
            {"wall_x", 1.0},        {"wall_half_width", 1.5}, {"trap_back_x", -0.5},
            {"survival_reward", 1.0}, {"energy_coeff", 0.5}};
  }

  explicit PointTrapOmni(const json& p)
      : Environment(make_spec(p)),
        params_(p),
        dt_(p.at("dt").get<double>()),
        damping_(p.at("damping").get<double>()),
        gain_(p.at("gain").get<double>()),
        arena_(p.at("arena_half_size").get<double>()),
        wall_x_(p.at("wall_x").get<double>()),
        wall_half_(p.at("wall_half_width").get<double>()),
        trap_back_x_(p.at("trap_back_x").get<double>()),
        survival_(p.at("survival_reward").get<double>()),
        energy_coeff_(p.at("energy_coeff").get<double>()) {
    if (arena_ <= 0.0) throw std::invalid_argument("arena_half_size must be positive");
  }

  Vector nominal_state() const override { return Vector::Zero(4); }

  StepResult step(const Vector& s, const Vector& action) const override {
    const Vector a = clip_actions(action);
    double x = s[0], y = s[1];
    double vx = damping_ * s[2] + dt_ * gain_ * a[0];
    double vy = damping_ * s[3] + dt_ * gain_ * a[1];

    double nx = x + dt_ * vx;
    // Front wall of the trap, x = wall_x for |y| <= wall_half.
    if (std::abs(y) <= wall_half_) {
      if (x < wall_x_ && nx >= wall_x_) {
        nx = wall_x_ - kMargin;
        vx = 0.0;
      } else if (x > wall_x_ && nx <= wall_x_) {
        nx = wall_x_ + kMargin;
        vx = 0.0;
      }
    }
    if (nx > arena_ || nx < -arena_) {
      nx = std::clamp(nx, -arena_, arena_);
      vx = 0.0;
    }

    double ny = y + dt_ * vy;
    // Side walls of the trap, y = +/- wall_half for trap_back_x <= x <= wall_x.
    if (nx >= trap_back_x_ && nx <= wall_x_) {
      for (double wy : {wall_half_, -wall_half_}) {
        if (y < wy && ny >= wy) {
          ny = wy - kMargin;
          vy = 0.0;
        } else if (y > wy && ny <= wy) {
          ny = wy + kMargin;
          vy = 0.0;
        }
      }
    }
    if (ny > arena_ || ny < -arena_) {
      ny = std::clamp(ny, -arena_, arena_);
      vy = 0.0;
    }

    Vector next(4);
    next << nx, ny, vx, vy;
    return {std::move(next), survival_ - energy_coeff_ * a.squaredNorm()};
  }

  Vector descriptor(const Vector& final_state, const Matrix&) const override {
    return clip_descriptor(final_state.head(2));
  }

  json parameters() const override { return params_; }

 private:
  static constexpr double kMargin = 1e-6;

  static EnvSpec make_spec(const json& p) {
    const double half = p.at("arena_half_size").get<double>();
    EnvSpec spec;
    spec.name = "point_trap_omni";
    spec.state_dim = 4;
    spec.action_dim = 2;
    spec.horizon = p.at("horizon").get<std::size_t>();
    spec.descriptor_dim = 2;
    spec.descriptor_lower = Vector::Constant(2, -half);
    spec.descriptor_upper = Vector::Constant(2, half);
    spec.init_noise_std = p.at("init_noise_std").get<double>();
    return spec;
  }

  json params_;
  double dt_, damping_, gain_, arena_, wall_x_, wall_half_, trap_back_x_, survival_, energy_coeff_;
};

// Planar arm of k links under torque control. Joint i sets the absolute
// heading theta_i of link i:
//   omega' = damping * omega + dt * gain * tau
//   theta' = theta + dt * omega'
// End effector = sum_i L_i (cos theta_i, sin theta_i). State is
// [theta_1..k, omega_1..k]. Reward: survival - energy_coeff * |tau|^2, with
// energy_coeff defaulting to survival / k so the minimum is 0.
class ArmOmni final : public Environment {
 public:
  static json defaults() {
    return {{"horizon", 100},   {"init_noise_std", 0.05}, {"dt", 0.1},
            {"damping", 0.9},   {"gain", 1.0},            {"link_lengths", {0.5, 0.3, 0.2}},
            {"survival_reward", 1.0}, {"energy_coeff", 1.0 / 3.0}};
  }

  explicit ArmOmni(const json& p)
      : Environment(make_spec(p)),
        params_(p),
        lengths_(p.at("link_lengths").get<std::vector<double>>()),
        dt_(p.at("dt").get<double>()),
        damping_(p.at("damping").get<double>()),
        gain_(p.at("gain").get<double>()),
        survival_(p.at("survival_reward").get<double>()),
        energy_coeff_(p.at("energy_coeff").get<double>()) {}

  Vector nominal_state() const override { return Vector::Zero(static_cast<Eigen::Index>(2 * k())); }

  StepResult step(const Vector& s, const Vector& action) const override {
    const Vector tau = clip_actions(action);
    const auto n = static_cast<Eigen::Index>(k());
    Vector next(2 * n);
    next.tail(n) = damping_ * s.tail(n) + dt_ * gain_ * tau;
    next.head(n) = s.head(n) + dt_ * next.tail(n);
    return {std::move(next), survival_ - energy_coeff_ * tau.squaredNorm()};
  }

  Vector descriptor(const Vector& final_state, const Matrix&) const override {
    Vector ee = Vector::Zero(2);
    for (std::size_t i = 0; i < k(); ++i) {
      const double th = final_state[static_cast<Eigen::Index>(i)];
      ee[0] += lengths_[i] * std::cos(th);
      ee[1] += lengths_[i] * std::sin(th);
    }
    return clip_descriptor(ee);
  }

  json parameters() const override { return params_; }

 private:
  std::size_t k() const { return lengths_.size(); }

  static EnvSpec make_spec(const json& p) {
    const auto lengths = p.at("link_lengths").get<std::vector<double>>();
    if (lengths.empty()) throw std::invalid_argument("arm_omni needs at least one link");
    double reach = 0.0;
    for (double l : lengths) {
      if (l <= 0.0) throw std::invalid_argument("link lengths must be positive");
      reach += l;
    }
    EnvSpec spec;
    spec.name = "arm_omni";
    spec.state_dim = 2 * lengths.size();
    spec.action_dim = lengths.size();
    spec.horizon = p.at("horizon").get<std::size_t>();
    spec.descriptor_dim = 2;
    spec.descriptor_lower = Vector::Constant(2, -reach);
    spec.descriptor_upper = Vector::Constant(2, reach);
    spec.init_noise_std = p.at("init_noise_std").get<double>();
    return spec;
  }

  json params_;
  std::vector<double> lengths_;
  double dt_, damping_, gain_, survival_, energy_coeff_;
};

// 1D locomotion with two legs. A leg is in contact when |a_i| exceeds the
// contact threshold, and only legs in contact push:
//   v' = clip(damping * v + dt * gain * sum_i [|a_i| > thr] a_i, -v_max, v_max)
//   phase' = phase + 2 pi / period   (carried as sin/cos in the state)
// State: [v, a_0 of previous step, a_1 of previous step, sin phase, cos phase].
// Reward: forward_weight * v' + survival - energy_coeff * |a|^2 + shift, where
// shift makes the minimum 0 for the defaults. Descriptor: per-leg contact rate.
class GaitUni final : public Environment {
 public:
  static json defaults() {
    return {{"horizon", 100},       {"init_noise_std", 0.05}, {"dt", 0.1},
            {"damping", 0.9},       {"gain", 1.0},            {"v_max", 1.0},
            {"contact_threshold", 0.5}, {"period", 20},       {"forward_weight", 1.0},
            {"survival_reward", 1.0},   {"energy_coeff", 0.25}, {"reward_shift", 0.5}};
  }

  explicit GaitUni(const json& p)
      : Environment(make_spec(p)),
        params_(p),
        dt_(p.at("dt").get<double>()),
        damping_(p.at("damping").get<double>()),
        gain_(p.at("gain").get<double>()),
        v_max_(p.at("v_max").get<double>()),
        threshold_(p.at("contact_threshold").get<double>()),
        phase_step_(2.0 * std::numbers::pi / p.at("period").get<double>()),
        forward_weight_(p.at("forward_weight").get<double>()),
        survival_(p.at("survival_reward").get<double>()),
        energy_coeff_(p.at("energy_coeff").get<double>()),
        shift_(p.at("reward_shift").get<double>()) {}

  Vector nominal_state() const override {
    Vector s = Vector::Zero(5);
    s[4] = 1.0;
    return s;
  }

  StepResult step(const Vector& s, const Vector& action) const override {
    const Vector a = clip_actions(action);
    double thrust = 0.0;
    for (Eigen::Index i = 0; i < 2; ++i) {
      if (std::abs(a[i]) > threshold_) thrust += a[i];
    }
    const double v = std::clamp(damping_ * s[0] + dt_ * gain_ * thrust, -v_max_, v_max_);
    const double c = std::cos(phase_step_), sn = std::sin(phase_step_);
    Vector next(5);
    next << v, a[0], a[1], s[3] * c + s[4] * sn, s[4] * c - s[3] * sn;
    return {std::move(next), forward_weight_ * v + survival_ - energy_coeff_ * a.squaredNorm() + shift_};
  }

  Vector descriptor(const Vector&, const Matrix& actions) const override {
    Vector d = Vector::Zero(2);
    if (actions.cols() == 0) return d;
    for (Eigen::Index t = 0; t < actions.cols(); ++t) {
      for (Eigen::Index i = 0; i < 2; ++i) {
        if (std::abs(actions(i, t)) > threshold_) d[i] += 1.0;
      }
    }
    return clip_descriptor(d / static_cast<double>(actions.cols()));
  }

  json parameters() const override { return params_; }

 private:
  static EnvSpec make_spec(const json& p) {
    EnvSpec spec;
    spec.name = "gait_uni";
    spec.state_dim = 5;
    spec.action_dim = 2;
    spec.horizon = p.at("horizon").get<std::size_t>();
    spec.descriptor_dim = 2;
    spec.descriptor_lower = Vector::Zero(2);
    spec.descriptor_upper = Vector::Ones(2);
    spec.init_noise_std = p.at("init_noise_std").get<double>();
    return spec;
  }

  json params_;
  double dt_, damping_, gain_, v_max_, threshold_, phase_step_, forward_weight_, survival_,
      energy_coeff_, shift_;
};

}  // namespace

Vector Environment::clip_descriptor(Vector d) const {
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i])) {
      d[i] = spec_.descriptor_lower[i];
    } else {
      d[i] = std::clamp(d[i], spec_.descriptor_lower[i], spec_.descriptor_upper[i]);
    }
  }
  return d;
}

std::vector<std::string> environment_names() { return {"point_trap_omni", "arm_omni", "gait_uni"}; }

std::unique_ptr<Environment> make_environment(const std::string& name, const json& overrides) {
  std::unique_ptr<Environment> env;
  if (name == "point_trap_omni") {
    env = std::make_unique<PointTrapOmni>(merge_parameters(name, PointTrapOmni::defaults(), overrides));
  } else if (name == "arm_omni") {
    env = std::make_unique<ArmOmni>(merge_parameters(name, ArmOmni::defaults(), overrides));
  } else if (name == "gait_uni") {
    env = std::make_unique<GaitUni>(merge_parameters(name, GaitUni::defaults(), overrides));
  } else {
    throw std::invalid_argument("unknown environment '" + name + "'");
  }
  if (env->spec().horizon == 0) throw std::invalid_argument("horizon must be >= 1");
  if (env->spec().init_noise_std < 0.0) throw std::invalid_argument("init_noise_std must be >= 0");
  return env;
}

PolicySpec policy_spec_for(const Environment& env, std::vector<std::size_t> hidden_layers,
                           Activation activation, bool output_squash) {
  PolicySpec spec;
  spec.state_dim = env.spec().state_dim;
  spec.action_dim = env.spec().action_dim;
  spec.hidden_layers = std::move(hidden_layers);
  spec.activation = activation;
  spec.output_squash = output_squash;
  spec.validate();
  return spec;
}

Rollout rollout(const Environment& env, const PolicySpec& spec, const Genotype& g, std::uint64_t seed) {
  const EnvSpec& es = env.spec();
  if (spec.state_dim != es.state_dim || spec.action_dim != es.action_dim) {
    throw std::invalid_argument("policy dimensions do not match environment " + es.name);
  }
  const auto horizon = static_cast<Eigen::Index>(es.horizon);
  Rollout r;
  r.states.resize(static_cast<Eigen::Index>(es.state_dim), horizon);
  r.actions.resize(static_cast<Eigen::Index>(es.action_dim), horizon);
  r.rewards.resize(horizon);

  Vector state = env.nominal_state();
  if (es.init_noise_std > 0.0) {
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, es.init_noise_std);
    for (Eigen::Index i = 0; i < state.size(); ++i) state[i] += noise(rng);
  }

  PolicyTape tape(spec);
  for (Eigen::Index t = 0; t < horizon; ++t) {
    r.states.col(t) = state;
    if (!r.truncated) {
      Vector action = tape.forward(g, state);
      StepResult step = env.step(state, action);
      if (action.allFinite() && step.next_state.allFinite() && std::isfinite(step.reward)) {
        r.actions.col(t) = action;
        r.rewards[t] = step.reward;
        state = std::move(step.next_state);
        continue;
      }
      r.truncated = true;
    }
    r.actions.col(t).setZero();
    r.rewards[t] = 0.0;
  }
  r.final_state = state;
  if (r.truncated) r.rewards.setZero();
  double fitness = 0.0;
  for (Eigen::Index t = 0; t < horizon; ++t) fitness += r.rewards[t];
  r.fitness = fitness;
  r.descriptor = env.descriptor(r.final_state, r.actions);
  return r;
}

}  // namespace ascii_me
