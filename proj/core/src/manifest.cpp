#include "topoprobe/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <json.hpp>
#include <set>

#include "topoprobe/lattice.hpp"
#include "topoprobe/rng.hpp"
#include "topoprobe/toric.hpp"

namespace topoprobe {
namespace {

using nlohmann::json;

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items()) {
    if (!ok.contains(k)) throw ConfigError(join(path, k), "unknown field");
  }
}

template <typename T>
T get(const json& obj, const std::string& path, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(join(path, key), "wrong type");
  }
}

template <typename T>
T require(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(join(path, key), "required field missing");
  return get<T>(obj, path, key, T{});
}

long get_int(const json& obj, const std::string& path, const std::string& key, long fallback,
             long min_value) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  const long x = v.get<long>();
  if (x < min_value) {
    throw ConfigError(join(path, key), "must be >= " + std::to_string(min_value));
  }
  return x;
}

std::vector<double> parse_grid(const json& v, const std::string& path) {
  std::vector<double> grid;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
      grid.push_back(v[i].get<double>());
    }
  } else if (v.is_object()) {
    check_keys(v, path, {"min", "max", "points"});
    const double lo = require<double>(v, path, "min");
    const double hi = require<double>(v, path, "max");
    const long points = get_int(v, path, "points", 0, 1);
    if (points < 1) throw ConfigError(join(path, "points"), "required field missing");
    if (points > 1 && !(hi > lo)) throw ConfigError(join(path, "max"), "must exceed min");
    grid = linear_grid(lo, hi, static_cast<int>(points));
  } else {
    throw ConfigError(path, "expected an array or {min, max, points}");
  }
  if (grid.empty()) throw ConfigError(path, "grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0.0) {
      throw ConfigError(path, "beta values must be finite and >= 0");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ConfigError(path, "grid must be strictly ascending");
  }
  return grid;
}

SampleSpec parse_samples(const json& root, const std::string& key) {
  if (!root.contains(key)) throw ConfigError(key, "required field missing");
  const auto& v = root.at(key);
  check_keys(v, key, {"beta_grid", "per_beta"});
  SampleSpec s;
  if (!v.contains("beta_grid")) throw ConfigError(key + ".beta_grid", "required field missing");
  s.beta_grid = parse_grid(v.at("beta_grid"), key + ".beta_grid");
  s.per_beta = static_cast<int>(get_int(v, key, "per_beta", 0, 1));
  if (s.per_beta < 1) throw ConfigError(key + ".per_beta", "required field missing");
  return s;
}

std::string default_architecture(ModelKind kind) {
  switch (kind) {
    case ModelKind::igt: return "igt_desk";
    case ModelKind::toric_x: return "toric_x_desk";
    case ModelKind::toric_z: return "toric_z_desk";
    case ModelKind::stabilizer: return "stabilizer";
  }
  return "igt_desk";
}

void apply_override(json& root, const std::string& path, const std::string& value) {
  if (path.empty()) throw ConfigError(path, "empty override path");
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ConfigError(path, "malformed override path");
    if (!node->is_object()) throw ConfigError(path, "override descends into a non-object");
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

json grid_json(const std::vector<double>& grid) { return json(grid); }

}  // namespace

std::uint64_t role_seed(std::uint64_t master_seed, const std::string& role) {
  return chain_seed(master_seed, role == "train" ? 0 : 1, 0x726f6c65);
}

ExperimentManifest parse_manifest(std::string_view json_text,
                                  const std::vector<std::pair<std::string, std::string>>& overrides) {
  json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded()) throw ConfigError("", "manifest is not valid JSON");
  if (!root.is_object()) throw ConfigError("", "manifest must be a JSON object");
  for (const auto& [path, value] : overrides) apply_override(root, path, value);

  check_keys(root, "", {"experiment_id", "kind", "n", "master_seed", "output_dir", "field_preset",
                        "train", "eval", "sampler", "stabilizer", "predictor", "detector",
                        "fidelity", "tool_version"});
  ExperimentManifest m;
  m.experiment_id = require<std::string>(root, "", "experiment_id");
  if (m.experiment_id.empty() ||
      !std::all_of(m.experiment_id.begin(), m.experiment_id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
      }) ||
      m.experiment_id.front() == '.') {
    throw ConfigError("experiment_id", "use letters, digits, '_', '-' and '.' only");
  }
  try {
    m.kind = parse_model_kind(require<std::string>(root, "", "kind"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("kind", e.what());
  }
  if (!root.contains("n")) throw ConfigError("n", "required field missing");
  m.n = static_cast<int>(get_int(root, "", "n", 0, 2));
  if (m.kind == ModelKind::toric_z && m.n > 4) {
    throw ConfigError("n", "σz limited to n ≤ 4");
  }
  if (root.contains("master_seed") && !root.at("master_seed").is_number_unsigned()) {
    throw ConfigError("master_seed", "expected a non-negative integer");
  }
  m.master_seed = get<std::uint64_t>(root, "", "master_seed", 0);
  m.output_dir = get<std::string>(root, "", "output_dir", ".");
  m.tool_version = TOPOPROBE_VERSION;

  const bool toric = m.kind != ModelKind::igt;
  m.field_preset = get<std::string>(root, "", "field_preset", toric ? "uniform(1)" : "");
  if (!toric && !m.field_preset.empty()) {
    throw ConfigError("field_preset", "igt experiments take no field");
  }
  if (toric) {
    try {
      field_preset(LatticeGeometry(m.n), m.field_preset);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("field_preset", e.what());
    }
  }

  m.train = parse_samples(root, "train");
  m.eval = parse_samples(root, "eval");

  if (root.contains("sampler")) {
    const auto& s = root.at("sampler");
    check_keys(s, "sampler", {"therm_attempts", "stride_attempts", "symmetrize"});
    m.sampler.symmetrize = get<bool>(s, "sampler", "symmetrize", true);
    m.sampler.therm_attempts = get_int(s, "sampler", "therm_attempts", 0, 0);
    m.sampler.stride_attempts = get_int(s, "sampler", "stride_attempts", 0, 0);
  }
  if (root.contains("stabilizer")) {
    const auto& s = root.at("stabilizer");
    check_keys(s, "stabilizer", {"mc_samples"});
    m.mc_samples = static_cast<int>(get_int(s, "stabilizer", "mc_samples", m.mc_samples, 1));
  }

  std::string arch_name = default_architecture(m.kind);
  json arch_json;
  if (root.contains("predictor")) {
    const auto& p = root.at("predictor");
    check_keys(p, "predictor", {"type", "architecture", "ensemble_seeds", "train_config"});
    const auto type = get<std::string>(p, "predictor", "type", "nn");
    if (type == "nn") {
      m.predictor = PredictorType::nn;
    } else if (type == "dos") {
      m.predictor = PredictorType::dos;
    } else {
      throw ConfigError("predictor.type", "expected 'nn' or 'dos'");
    }
    if (p.contains("architecture")) {
      const auto& a = p.at("architecture");
      if (a.is_string()) {
        arch_name = a.get<std::string>();
      } else if (a.is_object()) {
        arch_json = a;
      } else {
        throw ConfigError("predictor.architecture", "expected a preset name or a descriptor");
      }
    }
    if (p.contains("ensemble_seeds")) {
      const auto& s = p.at("ensemble_seeds");
      if (!s.is_array() || s.empty()) {
        throw ConfigError("predictor.ensemble_seeds", "expected a nonempty array");
      }
      m.ensemble_seeds.clear();
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s[i].is_number_unsigned()) {
          throw ConfigError("predictor.ensemble_seeds[" + std::to_string(i) + "]",
                            "expected a non-negative integer");
        }
        m.ensemble_seeds.push_back(s[i].get<std::uint64_t>());
      }
    }
    if (p.contains("train_config")) {
      const std::string path = "predictor.train_config";
      const auto& t = p.at("train_config");
      check_keys(t, path, {"learning_rate", "beta1", "beta2", "epsilon", "batch_size", "epochs",
                           "validation_fraction", "augment_translations"});
      auto& c = m.train_config;
      c.learning_rate = get<double>(t, path, "learning_rate", c.learning_rate);
      c.beta1 = get<double>(t, path, "beta1", c.beta1);
      c.beta2 = get<double>(t, path, "beta2", c.beta2);
      c.epsilon = get<double>(t, path, "epsilon", c.epsilon);
      c.batch_size = static_cast<int>(get_int(t, path, "batch_size", c.batch_size, 1));
      c.epochs = static_cast<int>(get_int(t, path, "epochs", c.epochs, 1));
      c.validation_fraction = get<double>(t, path, "validation_fraction", c.validation_fraction);
      c.augment_translations = get<bool>(t, path, "augment_translations", c.augment_translations);
      try {
        validate(c);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
      }
    }
  }
  if (m.predictor == PredictorType::dos && m.kind != ModelKind::igt) {
    throw ConfigError("predictor.type", "the density-of-states predictor needs igt data");
  }
  try {
    m.architecture = arch_json.is_null() ? architecture_preset(arch_name, m.n)
                                         : parse_architecture(arch_json.dump());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("predictor.architecture", e.what());
  }
  const TensorShape expected = m.kind == ModelKind::stabilizer ? TensorShape{m.n * m.n, 1, 1}
                                                               : TensorShape{2, m.n, m.n};
  if (m.predictor == PredictorType::nn && m.architecture.input != expected) {
    throw ConfigError("predictor.architecture", "input shape does not match the data");
  }

  if (root.contains("detector")) {
    const auto& d = root.at("detector");
    check_keys(d, "detector", {"smoothing_window"});
    m.smoothing_window = static_cast<int>(get_int(d, "detector", "smoothing_window", -1, -1));
    if (m.smoothing_window == 0) throw ConfigError("detector.smoothing_window", "must be -1 or >= 1");
  }

  if (root.contains("fidelity")) {
    const auto& f = root.at("fidelity");
    check_keys(f, "fidelity", {"beta_grid", "mc_samples", "method"});
    if (!toric) throw ConfigError("fidelity", "fidelity needs a toric field");
    m.has_fidelity = true;
    if (!f.contains("beta_grid")) throw ConfigError("fidelity.beta_grid", "required field missing");
    m.fidelity_grid = parse_grid(f.at("beta_grid"), "fidelity.beta_grid");
    m.fidelity_samples = static_cast<int>(get_int(f, "fidelity", "mc_samples", m.fidelity_samples, 2));
    const auto method = get<std::string>(f, "fidelity", "method", "mc");
    if (method != "mc" && method != "exact") throw ConfigError("fidelity.method", "expected 'mc' or 'exact'");
    m.fidelity_exact = method == "exact";
    if (m.fidelity_exact && m.n > 3) throw ConfigError("fidelity.method", "exact enumeration needs n <= 3");
  }
  return m;
}

std::string manifest_to_json(const ExperimentManifest& m) {
  nlohmann::ordered_json j;
  j["experiment_id"] = m.experiment_id;
  j["kind"] = to_string(m.kind);
  j["n"] = m.n;
  j["master_seed"] = m.master_seed;
  j["output_dir"] = m.output_dir;
  if (m.kind != ModelKind::igt) j["field_preset"] = m.field_preset;
  j["train"] = {{"beta_grid", grid_json(m.train.beta_grid)}, {"per_beta", m.train.per_beta}};
  j["eval"] = {{"beta_grid", grid_json(m.eval.beta_grid)}, {"per_beta", m.eval.per_beta}};
  j["sampler"] = {{"therm_attempts", m.sampler.therm_attempts},
                  {"stride_attempts", m.sampler.stride_attempts},
                  {"symmetrize", m.sampler.symmetrize}};
  if (m.kind == ModelKind::stabilizer) j["stabilizer"] = {{"mc_samples", m.mc_samples}};
  nlohmann::ordered_json p;
  p["type"] = m.predictor == PredictorType::nn ? "nn" : "dos";
  if (m.predictor == PredictorType::nn) {
    p["architecture"] = nlohmann::ordered_json::parse(architecture_to_json(m.architecture));
    p["ensemble_seeds"] = m.ensemble_seeds;
    const auto& c = m.train_config;
    p["train_config"] = {{"learning_rate", c.learning_rate},
                         {"beta1", c.beta1},
                         {"beta2", c.beta2},
                         {"epsilon", c.epsilon},
                         {"batch_size", c.batch_size},
                         {"epochs", c.epochs},
                         {"validation_fraction", c.validation_fraction},
                         {"augment_translations", c.augment_translations}};
  }
  j["predictor"] = p;
  j["detector"] = {{"smoothing_window", m.smoothing_window}};
  if (m.has_fidelity) {
    j["fidelity"] = {{"beta_grid", grid_json(m.fidelity_grid)},
                     {"mc_samples", m.fidelity_samples},
                     {"method", m.fidelity_exact ? "exact" : "mc"}};
  }
  j["tool_version"] = m.tool_version;
  return j.dump(2) + "\n";
}

}  // namespace topoprobe
