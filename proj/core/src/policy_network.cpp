#include "ascii_me/policy_network.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ascii_me/rng.hpp"

namespace ascii_me {

static_assert(std::endian::native == std::endian::little,
              "binary genotype format assumes a little-endian host");

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeights = Eigen::Map<const RowMajorMatrix>;
using Weights = Eigen::Map<RowMajorMatrix>;

struct LayerView {
  std::size_t offset;  // start of the weight block in the flat vector
  std::size_t fan_in;
  std::size_t fan_out;
  std::size_t bias_offset() const { return offset + fan_in * fan_out; }
};

std::vector<LayerView> layer_views(const std::vector<std::size_t>& widths) {
  std::vector<LayerView> views;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    views.push_back({offset, widths[l], widths[l + 1]});
    offset += (widths[l] + 1) * widths[l + 1];
  }
  return views;
}

// tanh through the vectorized exp: sign(z) (1 - e) / (1 + e) with e = exp(-2|z|).
// Absolute error stays within a few ulp of std::tanh.
void tanh_inplace(Eigen::Ref<Matrix> z) {
  const Eigen::ArrayXXd e = (-2.0 * z.array().abs()).exp();
  const Eigen::ArrayXXd y = (1.0 - e) / (1.0 + e);
  z = (z.array() < 0.0).select(-y, y);
}

void apply_activation(Activation a, Eigen::Ref<Matrix> z) {
  switch (a) {
    case Activation::tanh:
      tanh_inplace(z);
      break;
    case Activation::relu:
      z = z.array().max(0.0);
      break;
  }
}

// Multiplies `delta` by the activation derivative, expressed through the
// activation output `y`.
void scale_by_derivative(Activation a, const Matrix& y, Eigen::Ref<Matrix> delta) {
  switch (a) {
    case Activation::tanh:
      delta.array() *= 1.0 - y.array().square();
      break;
    case Activation::relu:
      delta.array() *= (y.array() > 0.0).cast<double>();
      break;
  }
}

void check_dims(const PolicySpec& spec, const Genotype& g) {
  if (g.size() != parameter_count(spec)) {
    throw std::invalid_argument("genotype length " + std::to_string(g.size()) +
                                " does not match parameter count " +
                                std::to_string(parameter_count(spec)));
  }
}

}  // namespace

std::string to_string(Activation a) {
  return a == Activation::tanh ? "tanh" : "relu";
}

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

void PolicySpec::validate() const {
  if (state_dim == 0 || action_dim == 0) {
    throw std::invalid_argument("policy state_dim and action_dim must be >= 1");
  }
  for (auto h : hidden_layers) {
    if (h == 0) throw std::invalid_argument("hidden layer widths must be >= 1");
  }
}

std::vector<std::size_t> PolicySpec::widths() const {
  std::vector<std::size_t> w;
  w.reserve(hidden_layers.size() + 2);
  w.push_back(state_dim);
  w.insert(w.end(), hidden_layers.begin(), hidden_layers.end());
  w.push_back(action_dim);
  return w;
}

std::uint64_t PolicySpec::hash() const {
  // FNV-1a over the canonical description.
  std::string canon = "mlp:" + std::to_string(state_dim) + ":" + std::to_string(action_dim) + ":";
  for (auto h : hidden_layers) canon += std::to_string(h) + ",";
  canon += ":" + to_string(activation) + ":" + (output_squash ? "squash" : "linear");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t parameter_count(const PolicySpec& spec) {
  const auto w = spec.widths();
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) n += (w[l] + 1) * w[l + 1];
  return n;
}

Genotype::Genotype(Vector params) : params_(std::move(params)) {
  if (!params_.allFinite()) throw std::invalid_argument("genotype contains non-finite entries");
}

Genotype::Genotype(std::vector<double> params)
    : Genotype(Vector(Eigen::Map<const Vector>(params.data(), static_cast<Eigen::Index>(params.size())))) {}

Genotype init_genotype(const PolicySpec& spec, std::uint64_t seed) {
  spec.validate();
  Vector params(static_cast<Eigen::Index>(parameter_count(spec)));
  Rng rng(seed);
  for (const auto& layer : layer_views(spec.widths())) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    const std::size_t end = layer.bias_offset() + layer.fan_out;
    for (std::size_t i = layer.offset; i < end; ++i) params[static_cast<Eigen::Index>(i)] = dist(rng);
  }
  return Genotype(std::move(params));
}

Vector forward(const PolicySpec& spec, const Genotype& g, const Eigen::Ref<const Vector>& state) {
  if (static_cast<std::size_t>(state.size()) != spec.state_dim) {
    throw std::invalid_argument("state has " + std::to_string(state.size()) +
                                " entries, policy expects " + std::to_string(spec.state_dim));
  }
  return forward_batch(spec, g, state);
}

Matrix forward_batch(const PolicySpec& spec, const Genotype& g,
                     const Eigen::Ref<const Matrix>& states) {
  PolicyTape tape(spec);
  return tape.forward(g, states);
}

Vector vjp(const PolicySpec& spec, const Genotype& g, const Eigen::Ref<const Vector>& state,
           const Eigen::Ref<const Vector>& cotangent) {
  if (static_cast<std::size_t>(state.size()) != spec.state_dim ||
      static_cast<std::size_t>(cotangent.size()) != spec.action_dim) {
    throw std::invalid_argument("vjp: state or cotangent dimension mismatch");
  }
  return vjp_sum(spec, g, state, cotangent);
}

Vector vjp_sum(const PolicySpec& spec, const Genotype& g, const Eigen::Ref<const Matrix>& states,
               const Eigen::Ref<const Matrix>& cotangents) {
  if (!states.allFinite() || !cotangents.allFinite()) {
    throw std::invalid_argument("vjp: non-finite state or cotangent");
  }
  PolicyTape tape(spec);
  tape.forward(g, states);
  return tape.backward(g, cotangents);
}

PolicyTape::PolicyTape(const PolicySpec& spec) : spec_(spec), widths_(spec.widths()) {
  spec_.validate();
  activations_.resize(widths_.size() - 1);
}

const Matrix& PolicyTape::forward(const Genotype& g, const Eigen::Ref<const Matrix>& states) {
  check_dims(spec_, g);
  if (static_cast<std::size_t>(states.rows()) != spec_.state_dim) {
    throw std::invalid_argument("forward: states have " + std::to_string(states.rows()) +
                                " rows, policy expects " + std::to_string(spec_.state_dim));
  }
  input_ = states;
  const auto views = layer_views(widths_);
  const double* p = g.params().data();
  const Matrix* prev = &input_;
  for (std::size_t l = 0; l < views.size(); ++l) {
    const auto& v = views[l];
    ConstWeights w(p + v.offset, static_cast<Eigen::Index>(v.fan_out),
                   static_cast<Eigen::Index>(v.fan_in));
    Eigen::Map<const Vector> b(p + v.bias_offset(), static_cast<Eigen::Index>(v.fan_out));
    Matrix& out = activations_[l];
    out.noalias() = w * (*prev);
    out.colwise() += b;
    const bool last = l + 1 == views.size();
    if (!last) {
      apply_activation(spec_.activation, out);
    } else if (spec_.output_squash) {
      tanh_inplace(out);
    }
    prev = &out;
  }
  return activations_.back();
}

Vector PolicyTape::backward(const Genotype& g, const Eigen::Ref<const Matrix>& cotangents) {
  check_dims(spec_, g);
  const Matrix& out = activations_.back();
  if (cotangents.rows() != out.rows() || cotangents.cols() != out.cols()) {
    throw std::invalid_argument("backward: cotangent shape does not match last forward pass");
  }
  const auto views = layer_views(widths_);
  const double* p = g.params().data();
  Vector grad = Vector::Zero(g.params().size());

  delta_ = cotangents;
  if (spec_.output_squash) delta_.array() *= 1.0 - out.array().square();

  for (std::size_t l = views.size(); l-- > 0;) {
    const auto& v = views[l];
    const Matrix& layer_in = l == 0 ? input_ : activations_[l - 1];
    Weights dw(grad.data() + v.offset, static_cast<Eigen::Index>(v.fan_out),
               static_cast<Eigen::Index>(v.fan_in));
    dw.noalias() = delta_ * layer_in.transpose();
    grad.segment(static_cast<Eigen::Index>(v.bias_offset()), static_cast<Eigen::Index>(v.fan_out)) =
        delta_.rowwise().sum();
    if (l == 0) break;
    ConstWeights w(p + v.offset, static_cast<Eigen::Index>(v.fan_out),
                   static_cast<Eigen::Index>(v.fan_in));
    delta_prev_.noalias() = w.transpose() * delta_;
    scale_by_derivative(spec_.activation, activations_[l - 1], delta_prev_);
    delta_.swap(delta_prev_);
  }
  return grad;
}

void write_genotype_binary(std::ostream& out, const PolicySpec& spec, const Genotype& g) {
  check_dims(spec, g);
  const char magic[4] = {'A', 'M', 'G', 'T'};
  const std::uint32_t version = 1;
  const std::uint64_t hash = spec.hash();
  const std::uint64_t count = g.size();
  out.write(magic, 4);
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&hash), sizeof hash);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write(reinterpret_cast<const char*>(g.params().data()),
            static_cast<std::streamsize>(count * sizeof(double)));
}

Genotype read_genotype_binary(std::istream& in, const PolicySpec& spec) {
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t hash = 0;
  std::uint64_t count = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&hash), sizeof hash);
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in || std::memcmp(magic, "AMGT", 4) != 0 || version != 1) {
    throw std::runtime_error("not a genotype blob");
  }
  if (hash != spec.hash() || count != parameter_count(spec)) {
    throw std::runtime_error("genotype blob was written for a different policy architecture");
  }
  Vector params(static_cast<Eigen::Index>(count));
  in.read(reinterpret_cast<char*>(params.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw std::runtime_error("truncated genotype blob");
  return Genotype(std::move(params));
}

std::string genotype_to_json(const PolicySpec& spec, const Genotype& g) {
  check_dims(spec, g);
  nlohmann::json j;
  j["state_dim"] = spec.state_dim;
  j["action_dim"] = spec.action_dim;
  j["hidden_layers"] = spec.hidden_layers;
  j["activation"] = to_string(spec.activation);
  j["output_squash"] = spec.output_squash;
  j["spec_hash"] = spec.hash();
  j["params"] = std::vector<double>(g.params().begin(), g.params().end());
  return j.dump();
}

}  // namespace ascii_me
