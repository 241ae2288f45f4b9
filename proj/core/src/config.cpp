#include "ascii_me/config.hpp"

#include <fstream>
#include <set>

namespace ascii_me {

using nlohmann::json;

namespace {

std::string archive_kind_name(ArchiveKind k) { return k == ArchiveKind::cvt ? "cvt" : "grid"; }

ArchiveKind archive_kind_from_string(const std::string& s) {
  if (s == "cvt") return ArchiveKind::cvt;
  if (s == "grid") return ArchiveKind::grid;
  throw ConfigError("archive.kind must be 'cvt' or 'grid'");
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + where + (where.empty() ? "" : ".") + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

json to_json(const RunConfig& c) {
  json env = c.env_overrides;
  env["name"] = c.env_name;
  return {
      {"env", env},
      {"policy",
       {{"hidden_layers", c.policy.hidden_layers},
        {"activation", to_string(c.policy.activation)},
        {"output_squash", c.policy.output_squash}}},
      {"batch_size", c.batch_size},
      {"ga_fraction", c.ga_fraction},
      {"eval_budget", c.eval_budget},
      {"seed", c.seed},
      {"worker_count", c.worker_count},
      {"operators",
       {{"isoline", {{"sigma1", c.isoline.sigma1}, {"sigma2", c.isoline.sigma2}}},
        {"ascii",
         {{"iterations", c.ascii.iterations},
          {"alpha", c.ascii.alpha},
          {"sigma_sq", c.ascii.sigma_sq},
          {"epsilon", c.ascii.epsilon},
          {"b", c.ascii.b},
          {"gamma", c.ascii.gamma},
          {"lambda1", c.ascii.lambda1}}}}},
      {"buffer",
       {{"capacity_transitions", c.buffer.capacity_transitions},
        {"source_mode", to_string(c.buffer.source_mode)}}},
      {"archive",
       {{"kind", archive_kind_name(c.archive.kind)},
        {"num_centroids", c.archive.num_centroids},
        {"grid_per_dim", c.archive.grid_per_dim},
        {"centroid_seed", c.archive.centroid_seed},
        {"samples_per_centroid", c.archive.cvt.samples_per_centroid},
        {"max_iterations", c.archive.cvt.max_iterations},
        {"cache_dir", c.archive.cache_dir}}},
      {"output", {{"checkpoint_every", c.checkpoint_every}}},
  };
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  try {
    reject_unknown(j, {"env", "policy", "batch_size", "ga_fraction", "eval_budget", "seed", "worker_count",
                       "operators", "buffer", "archive", "output"},
                   "");
    if (j.contains("env")) {
      const json& env = j.at("env");
      if (!env.is_object()) throw ConfigError("env must be an object");
      c.env_overrides = json::object();
      for (const auto& [key, value] : env.items()) {
        if (key == "name") {
          c.env_name = value.get<std::string>();
        } else {
          c.env_overrides[key] = value;
        }
      }
    }
    if (j.contains("policy")) {
      const json& p = j.at("policy");
      reject_unknown(p, {"hidden_layers", "activation", "output_squash"}, "policy");
      read(p, "hidden_layers", c.policy.hidden_layers);
      if (p.contains("activation")) c.policy.activation = activation_from_string(p.at("activation").get<std::string>());
      read(p, "output_squash", c.policy.output_squash);
    }
    read(j, "batch_size", c.batch_size);
    read(j, "ga_fraction", c.ga_fraction);
    read(j, "eval_budget", c.eval_budget);
    read(j, "seed", c.seed);
    read(j, "worker_count", c.worker_count);
    if (j.contains("operators")) {
      const json& ops = j.at("operators");
      reject_unknown(ops, {"isoline", "ascii"}, "operators");
      if (ops.contains("isoline")) {
        const json& iso = ops.at("isoline");
        reject_unknown(iso, {"sigma1", "sigma2"}, "operators.isoline");
        read(iso, "sigma1", c.isoline.sigma1);
        read(iso, "sigma2", c.isoline.sigma2);
      }
      if (ops.contains("ascii")) {
        const json& a = ops.at("ascii");
        reject_unknown(a, {"iterations", "alpha", "sigma_sq", "epsilon", "b", "gamma", "lambda1"}, "operators.ascii");
        read(a, "iterations", c.ascii.iterations);
        read(a, "alpha", c.ascii.alpha);
        read(a, "sigma_sq", c.ascii.sigma_sq);
        read(a, "epsilon", c.ascii.epsilon);
        read(a, "b", c.ascii.b);
        read(a, "gamma", c.ascii.gamma);
        read(a, "lambda1", c.ascii.lambda1);
      }
    }
    if (j.contains("buffer")) {
      const json& b = j.at("buffer");
      reject_unknown(b, {"capacity_transitions", "source_mode"}, "buffer");
      read(b, "capacity_transitions", c.buffer.capacity_transitions);
      if (b.contains("source_mode")) c.buffer.source_mode = source_mode_from_string(b.at("source_mode").get<std::string>());
    }
    if (j.contains("archive")) {
      const json& a = j.at("archive");
      reject_unknown(a, {"kind", "num_centroids", "grid_per_dim", "centroid_seed", "samples_per_centroid",
                         "max_iterations", "cache_dir"},
                     "archive");
      if (a.contains("kind")) c.archive.kind = archive_kind_from_string(a.at("kind").get<std::string>());
      read(a, "num_centroids", c.archive.num_centroids);
      read(a, "grid_per_dim", c.archive.grid_per_dim);
      read(a, "centroid_seed", c.archive.centroid_seed);
      read(a, "samples_per_centroid", c.archive.cvt.samples_per_centroid);
      read(a, "max_iterations", c.archive.cvt.max_iterations);
      read(a, "cache_dir", c.archive.cache_dir);
    }
    if (j.contains("output")) {
      const json& o = j.at("output");
      reject_unknown(o, {"checkpoint_every"}, "output");
      read(o, "checkpoint_every", c.checkpoint_every);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  // Surface bad environment names and parameters at load time.
  try {
    make_environment(c.env_name, c.env_overrides);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return c;
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t pos = 0;
  for (;;) {
    const auto dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (part.empty()) throw ConfigError("empty path segment in override key " + key);
    if (!node->is_object()) throw ConfigError("override key " + key + " descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    pos = dot + 1;
  }
}

RunConfig resolve_run_config(const std::string& config_path, const std::vector<std::string>& overrides) {
  json doc = config_path.empty() ? to_json(RunConfig{}) : load_json_file(config_path);
  for (const auto& o : overrides) apply_override(doc, o);
  return run_config_from_json(doc);
}

}  // namespace ascii_me
