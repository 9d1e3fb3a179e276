#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtrl/distribution.hpp"
#include "mtrl/env.hpp"
#include "mtrl/oracles.hpp"
#include "mtrl/rng.hpp"

namespace mtrl {

// Coverage test on oracle value estimates; both inequalities are strict.
inline bool cnd(double v_ij, double v_ii, double v_jj, double eps) {
  return std::abs(v_ij - v_ii) < eps && std::abs(v_ij - v_jj) < eps;
}

struct CoverMatrix {
  int n = 0;
  std::vector<std::uint8_t> a;  // row-major; a[i*n+j]: pair j covers task i

  CoverMatrix() = default;
  explicit CoverMatrix(int n_) : n(n_), a(std::size_t(n_) * n_, 0) {}
  bool at(int i, int j) const { return a[std::size_t(i) * n + j] != 0; }
  void set(int i, int j, bool v) { a[std::size_t(i) * n + j] = v ? 1 : 0; }
};

// Greedy column cover. Picks the column covering the most still-uncovered
// rows (ties to the lowest index) until the cumulative cover count reaches
// (1-3*delta)*n. Returns picks in order; empty when the target is <= 0.
std::vector<int> greedy_cover(const CoverMatrix& A, double delta);

// |mean - v| >= 4*eps + sqrt(2*ln(4K/delta)/n) triggers elimination after n
// episodes of the active pair.
double elimination_threshold(double epsilon, double delta, std::uint64_t K,
                             std::uint64_t n);

struct PolicyValuePair {
  Policy policy;
  double v = 0.0;
};

struct PretrainPhase {
  int N = 0;
  int cover_size = 0;
  double stop_lhs = 0.0;
  bool accepted = false;
};

struct PolicyValueSet {
  double epsilon = 0.0, delta = 0.0;
  std::vector<PolicyValuePair> pairs;
  // provenance
  std::vector<PretrainPhase> phases;
  std::uint64_t oracle_episodes = 0;
  bool white_box = false;
  bool n_capped = false;          // doubling stopped by the configured cap
  bool stopped_without_rule = false;  // returned before the rule held
};

struct PretrainOptions {
  std::uint64_t K = 0;  // if > 0, delta = epsilon = 1/sqrt(K)
  double delta = 0.0, epsilon = 0.0;  // direct parameters when K == 0
  int n_cap = 0;        // task-sample cap per phase; 0 = uncapped
  int max_phases = 20;
};

// Algorithm: per phase sample N tasks, learn a policy per task at eps/2,
// evaluate every policy on every task at eps/2, mark coverage via cnd, run
// greedy_cover, and accept once sqrt(|U|*ln(2N/delta)/(N-|U|)) <= delta,
// else double N. Returns the picked (policy, value) pairs in pick order.
PolicyValueSet pretrain(const MdpDistribution& dist, const PretrainOptions& opt,
                        const OracleSettings& oracle, RandomStream& rng);

struct EliminationEvent {
  std::uint64_t episode = 0;
  int pair_index = 0;
  double mean = 0.0;
  double threshold = 0.0;
};

struct RegretRow {
  std::uint64_t episode = 0;
  int phase = 0;       // 1-based elimination phase; -1 in learner fallback
  int pair_index = 0;  // index into the pair set; -1 in learner fallback
  double ret = 0.0;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
};

struct FinetuneResult {
  std::vector<RegretRow> rows;
  std::vector<EliminationEvent> events;
  bool fallback = false;
  std::uint64_t fallback_episode = 0;
  double total_regret = 0.0;
};

// Test stage: play the highest-claimed-value live pair, eliminate on
// threshold breach; if every pair dies, fall back to the single-task
// optimistic learner for the remaining budget (flagged). Instantaneous
// regret is measured white-box; the algorithm itself sees only returns.
FinetuneResult finetune(const PolicyValueSet& set, EnvHandle env,
                        std::uint64_t K, double delta, double epsilon);

// From-scratch single-task optimistic learner run for K episodes
// (regret-instrumented baseline; phase/pair columns are -1).
FinetuneResult single_task_baseline(EnvHandle env, std::uint64_t K);

std::string pvset_to_json(const PolicyValueSet& set, int indent = -1);
PolicyValueSet pvset_from_json(const std::string& text);

struct PceExperimentConfig {
  std::uint64_t K = 0;
  int num_seeds = 1;
  int num_test_draws = 1;
  PretrainOptions pre;      // K is filled from the outer K when zero
  OracleSettings oracle;
  std::uint64_t master_seed = 1;
};

struct PceSeedResult {
  PolicyValueSet set;
  std::vector<int> draw_indices;
  std::vector<FinetuneResult> draws;
};

struct PceExperimentResult {
  std::vector<PceSeedResult> seeds;
  double mean_final_regret = 0.0;
  double stderr_final_regret = 0.0;
  std::uint64_t total_pretrain_episodes = 0;
};

// Pre-train once per seed, then fine-tune on num_test_draws fresh task draws.
PceExperimentResult run_pce_experiment(const MdpDistribution& dist,
                                       const PceExperimentConfig& cfg);

}  // namespace mtrl
