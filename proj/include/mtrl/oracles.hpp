#pragma once

#include <cstdint>
#include <utility>

#include "mtrl/env.hpp"
#include "mtrl/mdp.hpp"
#include "mtrl/rng.hpp"

namespace mtrl {

struct OracleSettings {
  bool white_box = false;  // exact planning/evaluation, zero episodes
  double C_o = 1.0;        // scales the learning oracle's episode schedule
};

struct OracleBudgetReport {
  std::uint64_t episodes_used = 0;
  double epsilon = 0.0;
  double log_inv_delta = 0.0;
  bool white_box = false;
};

// Episode schedule of the learning oracle:
// ceil(C_o * S^2*A*H^2 * ln(S*A*H/eps) * (log_inv_delta + 1) / eps^2).
std::uint64_t learn_schedule(int S, int A, int H, double epsilon,
                             double log_inv_delta, double C_o);

// Policy-learning oracle: optimistic value iteration on the environment's
// empirical model (single-task specialization of the multi-task trainer),
// followed by a best-of-N1 re-selection over uniformly drawn iterates, each
// scored by the Monte-Carlo evaluator at accuracy eps/2. Returns a policy
// that is eps-optimal with probability >= 1 - exp(-log_inv_delta).
std::pair<Policy, OracleBudgetReport> learn_policy(
    EnvHandle env, double epsilon, double log_inv_delta, RandomStream& rng,
    const OracleSettings& settings = {});

// Monte-Carlo policy evaluation: mean return over
// n = ceil(2*(ln 2 + log_inv_delta)/eps^2) episodes.
std::pair<double, OracleBudgetReport> evaluate_policy(
    EnvHandle env, const Policy& pi, double epsilon, double log_inv_delta,
    const OracleSettings& settings = {});

std::uint64_t evaluate_episode_count(double epsilon, double log_inv_delta);

}  // namespace mtrl
