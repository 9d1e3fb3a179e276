#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtrl/bandits.hpp"
#include "mtrl/distribution.hpp"

namespace mtrl {

// Bad configuration input (file, JSON, or override syntax). The CLI maps
// this to exit code 2; everything else thrown during a run maps to 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InstanceSpec {
  std::string generator;  // prop1 | theorem3 | exp-tail | random-tabular
  std::string file;       // alternative: JSON document on disk
  int M = 0;              // prop1 / theorem3 support size
  double gap = 0.0;       // theorem3 arm gap
  double lambda = 1.0;    // exp-tail decay
  int S = 0, A = 0, H = 0, num_mdps = 0;  // random-tabular / exp-tail family
  std::string noise = "bernoulli";
};

struct AlgoOverrides {
  int n_cap = 0;        // pre-training task-sample cap (0 = none)
  int max_phases = 20;  // pre-training doubling rounds
  double pre_delta = 0.0, pre_epsilon = 0.0;  // direct pre-training params
  double C1 = 1.0, C2 = 1.0;
  std::string mode = "coordinate";  // coordinate | exhaustive
  int N = 0;                        // task-sample count (omerm)
  bool high_prob = false;           // run the boosted trainer
};

struct ExperimentConfig {
  std::string experiment;  // pce | omerm | bandit-ucb | bandit-ratio | validate
  InstanceSpec instance;
  std::uint64_t budget = 0;  // episodes K (MDP runs) or steps T (bandit runs)
  std::vector<std::uint64_t> T_grid;  // bandit-ratio only
  double epsilon = 0.1;    // omerm target accuracy
  double delta = 0.1;      // omerm boost failure probability
  int num_test_draws = 1;
  int num_seeds = 1;
  std::uint64_t master_seed = 1;
  bool white_box = false;
  double C_o = 1.0;
  AlgoOverrides algo;
  std::string out_dir = "out";

  std::string effective;  // merged JSON actually used, echoed into metadata
};

// Parses the JSON text, applies dotted key=value overrides (values parsed as
// JSON when possible, else kept as strings), validates, and returns the
// config together with its effective-JSON echo. Throws ConfigError.
ExperimentConfig config_from_json_text(
    const std::string& text, const std::vector<std::string>& overrides = {});

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

// Instance materialization. Generator-based instances draw any randomness
// from derive_stream(master_seed, stream_id(kInstanceGen)).
MdpDistribution build_mdp_distribution(const InstanceSpec& spec,
                                       std::uint64_t master_seed);
BanditDistribution build_bandit_distribution(const InstanceSpec& spec,
                                             std::uint64_t master_seed);

}  // namespace mtrl
