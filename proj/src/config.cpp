#include "mtrl/config.hpp"

#include <fstream>
#include <set>

#include "json.hpp"
#include "mtrl/csv.hpp"

namespace mtrl {

namespace {

using nlohmann::json;

json parse_override_value(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded()) return json(text);  // bare strings stay strings
  return v;
}

void apply_override(json& cfg, const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key=value: " + spec);
  std::string path = spec.substr(0, eq);
  json value = parse_override_value(spec.substr(eq + 1));
  json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    auto dot = path.find('.', start);
    std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ConfigError("empty key segment in: " + spec);
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    if (!node->is_object() && !node->is_null())
      throw ConfigError("override path crosses a non-object: " + spec);
    start = dot + 1;
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad type for field '") + key + "'");
  }
}

NoiseKind noise_from_name(const std::string& name) {
  if (name == "bernoulli") return NoiseKind::Bernoulli;
  if (name == "gaussian") return NoiseKind::Gaussian;
  if (name == "deterministic") return NoiseKind::Deterministic;
  throw ConfigError("unknown noise kind: " + name);
}

}  // namespace

ExperimentConfig config_from_json_text(
    const std::string& text, const std::vector<std::string>& overrides) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config is not valid JSON");
  if (!j.is_object()) throw ConfigError("config root must be an object");
  for (const auto& ov : overrides) apply_override(j, ov);

  ExperimentConfig cfg;
  cfg.experiment = get_or<std::string>(j, "experiment", "");
  static const std::set<std::string> kKinds{"pce", "omerm", "bandit-ucb",
                                            "bandit-ratio", "validate"};
  if (!kKinds.count(cfg.experiment))
    throw ConfigError("experiment must be one of pce, omerm, bandit-ucb, "
                      "bandit-ratio, validate");

  if (j.contains("instance")) {
    const json& ji = j.at("instance");
    if (!ji.is_object()) throw ConfigError("instance must be an object");
    cfg.instance.generator = get_or<std::string>(ji, "generator", "");
    cfg.instance.file = get_or<std::string>(ji, "file", "");
    cfg.instance.M = get_or<int>(ji, "M", 0);
    cfg.instance.gap = get_or<double>(ji, "gap", 0.0);
    cfg.instance.lambda = get_or<double>(ji, "lambda", 1.0);
    cfg.instance.S = get_or<int>(ji, "S", 0);
    cfg.instance.A = get_or<int>(ji, "A", 0);
    cfg.instance.H = get_or<int>(ji, "H", 0);
    cfg.instance.num_mdps = get_or<int>(ji, "num_mdps", 0);
    cfg.instance.noise = get_or<std::string>(ji, "noise", "bernoulli");
  }

  // K and T are aliases for the single budget field.
  if (j.contains("K") && j.contains("T"))
    throw ConfigError("give either K or T, not both");
  cfg.budget = get_or<std::uint64_t>(j, "K", 0);
  if (j.contains("T")) cfg.budget = get_or<std::uint64_t>(j, "T", 0);
  if (j.contains("T_grid")) {
    try {
      cfg.T_grid = j.at("T_grid").get<std::vector<std::uint64_t>>();
    } catch (const json::exception&) {
      throw ConfigError("T_grid must be an array of step counts");
    }
  }
  cfg.epsilon = get_or<double>(j, "epsilon", 0.1);
  cfg.delta = get_or<double>(j, "delta", 0.1);
  cfg.num_test_draws = get_or<int>(j, "num_test_draws", 1);
  cfg.num_seeds = get_or<int>(j, "num_seeds", 1);
  cfg.master_seed = get_or<std::uint64_t>(j, "master_seed", 1);

  if (j.contains("oracle")) {
    const json& jo = j.at("oracle");
    cfg.white_box = get_or<bool>(jo, "white_box", false);
    cfg.C_o = get_or<double>(jo, "C_o", 1.0);
  }
  if (j.contains("algo")) {
    const json& ja = j.at("algo");
    cfg.algo.n_cap = get_or<int>(ja, "n_cap", 0);
    cfg.algo.max_phases = get_or<int>(ja, "max_phases", 20);
    cfg.algo.pre_delta = get_or<double>(ja, "delta", 0.0);
    cfg.algo.pre_epsilon = get_or<double>(ja, "epsilon", 0.0);
    cfg.algo.C1 = get_or<double>(ja, "C1", 1.0);
    cfg.algo.C2 = get_or<double>(ja, "C2", 1.0);
    cfg.algo.mode = get_or<std::string>(ja, "mode", "coordinate");
    cfg.algo.N = get_or<int>(ja, "N", 0);
    cfg.algo.high_prob = get_or<bool>(ja, "high_prob", false);
  }
  cfg.out_dir = get_or<std::string>(j, "out_dir", "out");

  if (cfg.num_test_draws < 0) throw ConfigError("num_test_draws must be >= 0");
  if (cfg.num_seeds < 1) throw ConfigError("num_seeds must be >= 1");
  if (cfg.algo.mode != "coordinate" && cfg.algo.mode != "exhaustive")
    throw ConfigError("algo.mode must be coordinate or exhaustive");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0))
    throw ConfigError("epsilon must be in (0,1]");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
    throw ConfigError("delta must be in (0,1)");
  if ((cfg.algo.pre_delta > 0.0) != (cfg.algo.pre_epsilon > 0.0))
    throw ConfigError("algo.delta and algo.epsilon go together");

  bool has_gen = !cfg.instance.generator.empty();
  bool has_file = !cfg.instance.file.empty();
  if (has_gen && has_file)
    throw ConfigError("instance: give a generator or a file, not both");
  if (!has_gen && !has_file)
    throw ConfigError("instance: a generator or a file is required");
  if (cfg.experiment == "validate" && !has_file)
    throw ConfigError("validate needs instance.file");
  if (has_gen) {
    static const std::set<std::string> kGens{"prop1", "theorem3", "exp-tail",
                                             "random-tabular"};
    if (!kGens.count(cfg.instance.generator))
      throw ConfigError("unknown generator: " + cfg.instance.generator);
  }

  if (cfg.experiment == "pce" && cfg.budget == 0)
    throw ConfigError("pce needs K >= 1");
  if (cfg.experiment == "bandit-ucb" && cfg.budget == 0)
    throw ConfigError("bandit-ucb needs T >= 1");
  if (cfg.experiment == "bandit-ratio" && cfg.T_grid.empty())
    throw ConfigError("bandit-ratio needs a T_grid");

  cfg.effective = j.dump(2);
  return cfg;
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return config_from_json_text(text, overrides);
}

MdpDistribution build_mdp_distribution(const InstanceSpec& spec,
                                       std::uint64_t master_seed) {
  if (!spec.file.empty()) {
    std::string text;
    try {
      text = read_text_file(spec.file);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
      throw ConfigError("instance file is not valid JSON: " + spec.file);
    if (j.contains("mdps")) return distribution_from_json(text);
    // Single-MDP document: wrap as a point-mass distribution.
    MdpDistribution d;
    d.probs = {1.0};
    d.mdps.push_back(
        std::make_shared<TabularMdp>(mdp_from_json(text)));
    return d;
  }
  if (spec.generator == "prop1") {
    if (spec.M < 1) throw ConfigError("prop1 needs M >= 1");
    return gen_proposition1_instance(spec.M);
  }
  if (spec.generator == "theorem3") {
    if (spec.M < 1) throw ConfigError("theorem3 needs M >= 1");
    if (!(spec.gap > 0.0 && spec.gap <= 0.5))
      throw ConfigError("theorem3 needs gap in (0, 1/2]");
    return gen_theorem3_instance(spec.M, spec.gap);
  }
  if (spec.generator == "random-tabular" || spec.generator == "exp-tail") {
    if (spec.S < 1 || spec.A < 1 || spec.H < 1 || spec.num_mdps < 1)
      throw ConfigError(spec.generator + " needs S, A, H, num_mdps >= 1");
    RandomStream rng =
        derive_stream(master_seed, stream_id(streams::kInstanceGen));
    MdpDistribution d = gen_random_tabular(spec.S, spec.A, spec.H,
                                           spec.num_mdps, rng,
                                           noise_from_name(spec.noise));
    if (spec.generator == "exp-tail")
      return gen_exponential_tail(std::move(d.mdps), spec.lambda);
    return d;
  }
  throw ConfigError("unknown generator: " + spec.generator);
}

BanditDistribution build_bandit_distribution(const InstanceSpec& spec,
                                             std::uint64_t master_seed) {
  if (spec.generator == "prop1") {
    if (spec.M < 1) throw ConfigError("prop1 needs M >= 1");
    return proposition1_bandits(spec.M);
  }
  if (spec.generator == "theorem3") {
    if (spec.M < 1) throw ConfigError("theorem3 needs M >= 1");
    if (!(spec.gap > 0.0 && spec.gap <= 0.5))
      throw ConfigError("theorem3 needs gap in (0, 1/2]");
    return theorem3_bandits(spec.M, spec.gap);
  }
  // Everything else goes through the MDP form and the H=1 conversion.
  MdpDistribution d = build_mdp_distribution(spec, master_seed);
  BanditDistribution b;
  b.probs = d.probs;
  try {
    for (const auto& m : d.mdps) b.instances.push_back(mdp_to_bandit(*m));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("instance is not a bandit: ") + e.what());
  }
  return b;
}

}  // namespace mtrl
