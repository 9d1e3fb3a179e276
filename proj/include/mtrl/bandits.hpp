#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mtrl/mdp.hpp"
#include "mtrl/rng.hpp"

namespace mtrl {

// K-armed bandit with Gaussian reward noise. sigma = 0 degenerates to
// deterministic rewards (used by the one-hot hard instances).
struct BanditInstance {
  std::vector<double> means;  // in [0,1]
  double sigma = 1.0;

  int arms() const { return int(means.size()); }
  double best() const;
  double gap(int k) const { return best() - means[k]; }
};

std::vector<std::string> validate_bandit(const BanditInstance& b);

// One reward draw. Consumes the same variate pattern as the episode
// simulator does on the H=1 conversion (action draw, noise, state draw), so
// a converted instance replays bit-identically from a shared stream.
double bandit_pull(const BanditInstance& b, int arm, RandomStream& rng);

struct PullRecord {
  std::vector<int> arms;             // a_t
  std::vector<double> rewards;       // y_t
  std::vector<std::uint64_t> counts; // S_k
  std::vector<double> sums;          // per-arm reward sums

  PullRecord() = default;
  explicit PullRecord(int K_arms) : counts(K_arms, 0), sums(K_arms, 0.0) {}
  std::uint64_t steps() const { return arms.size(); }
  void push(int arm, double reward);
};

// Index of an arm with the given empirical mean and pull count at step t:
// mean + sqrt(2*ln f(t) / pulls), f(t) = 1 + t*ln^2 t, natural logs.
double ucb_index(double mean, std::uint64_t pulls, std::uint64_t t);

// Pull each arm once in index order, then follow the index rule (ties to
// the lowest arm index). Requires T >= number of arms.
PullRecord ucb_run(const BanditInstance& b, std::uint64_t T, RandomStream& rng);

// Gap decomposition sum_k gap_k * S_k. Throws on an inconsistent record
// (count/log mismatch, out-of-range arms, size mismatch with the instance).
double pseudo_regret(const PullRecord& rec, const BanditInstance& b);

// Same quantity summed step by step: sum_t (r* - r_{a_t}). The two
// computations agree to 1e-12 on any consistent record.
double pseudo_regret_stepwise(const PullRecord& rec, const BanditInstance& b);

// 9*sqrt(K_arms * T * ln T).
double ucb_regret_bound(int K_arms, std::uint64_t T);

struct BanditDistribution {
  std::vector<double> probs;
  std::vector<BanditInstance> instances;
  int size() const { return int(instances.size()); }
};

std::vector<std::string> validate_bandit_distribution(
    const BanditDistribution& d);
int sample_bandit_index(const BanditDistribution& d, RandomStream& rng);

// Uniform over M one-hot instances: member i pays 1 on arm i, 0 elsewhere,
// deterministic rewards.
BanditDistribution proposition1_bandits(int M);

// Uniform over M instances; member i has means 0.5 + gap on arm i and 0.5
// elsewhere, Gaussian(1) noise. Requires gap in (0, 1/2].
BanditDistribution theorem3_bandits(int M, double gap);

// S=1, H=1, A=arms conversion; Gaussian(sigma) noise, or deterministic when
// sigma = 0. The inverse accepts exactly that shape.
std::shared_ptr<const TabularMdp> bandit_to_mdp(const BanditInstance& b);
BanditInstance mdp_to_bandit(const TabularMdp& m);

// Distribution-aware baseline: draws the test instance from `dist`, then
// runs the policy-elimination fine-tuner over the exact support pairs
// (best arm of member l, its best mean), played by descending claimed value
// with ties to the lowest index, at epsilon = delta = 1/sqrt(T). Knowing D
// includes knowing its noise scale, so the Hoeffding radius is scaled by
// the largest support sigma. If every pair is eliminated, an index-rule
// learner takes the remaining budget. With true_dist_known = false the same
// test draw is made but the knowledge is discarded: the run is plain
// ucb_run on the drawn instance.
PullRecord informed_elimination_run(const BanditDistribution& dist,
                                    bool true_dist_known, std::uint64_t T,
                                    RandomStream& rng);

struct RatioRow {
  std::uint64_t T = 0;
  double mean_informed = 0.0;
  double mean_ucb = 0.0;
  double ratio = 0.0;
};

struct RatioRunRow {
  std::uint64_t T = 0;
  int seed = 0;
  bool informed = false;
  double pseudo_regret = 0.0;
};

// For each T in the ascending grid: mean pseudo-regret of the informed
// elimination baseline and of UCB over num_seeds paired test draws, plus
// their ratio. Illustrative only; no asymptotic claim is made. When `runs`
// is given, every individual run lands there in (T, seed, informed) order.
std::vector<RatioRow> asymptotic_ratio_experiment(
    const BanditDistribution& dist, const std::vector<std::uint64_t>& T_grid,
    int num_seeds, std::uint64_t master_seed,
    std::vector<RatioRunRow>* runs = nullptr);

}  // namespace mtrl
