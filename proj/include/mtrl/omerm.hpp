#pragma once

#include <cstdint>
#include <vector>

#include "mtrl/distribution.hpp"
#include "mtrl/env.hpp"
#include "mtrl/mdp.hpp"
#include "mtrl/rng.hpp"

namespace mtrl {

// Size parameters entering the exploration bonus: N tasks trained jointly
// for K iterations on shape (S,A,H).
struct OmermSizes {
  int S = 0, A = 0, H = 0, N = 1;
  std::uint64_t K = 1;
};

// b(count) = sqrt(8*S*ln(8*S*A*N*H*K) / max(1,count)), natural log.
double omerm_bonus(const OmermSizes& sz, double count);

// Per-task empirical model: visit counts, transition counts, reward sums.
struct EmpiricalModel {
  int S = 0, A = 0, H = 0, s1 = 0;
  std::uint64_t episodes = 0;
  std::vector<double> n_sa;    // H*S*A
  std::vector<double> n_sas;   // H*S*A*S
  std::vector<double> rew_sum; // H*S*A

  EmpiricalModel() = default;
  EmpiricalModel(int S_, int A_, int H_, int s1_)
      : S(S_), A(A_), H(H_), s1(s1_),
        n_sa(std::size_t(H_) * S_ * A_, 0.0),
        n_sas(std::size_t(H_) * S_ * A_ * S_, 0.0),
        rew_sum(std::size_t(H_) * S_ * A_, 0.0) {}

  std::size_t idx(int h, int s, int a) const {
    return (std::size_t(h) * S + s) * A + a;
  }
  std::size_t tidx(int h, int s, int a, int s2) const {
    return ((std::size_t(h) * S + s) * A + a) * S + s2;
  }
  void update(const Trajectory& tr);
  double phat(int h, int s, int a, int s2) const {
    double n = n_sa[idx(h, s, a)];
    return n_sas[tidx(h, s, a, s2)] / (n >= 1.0 ? n : 1.0);
  }
  double rhat(int h, int s, int a) const {
    double n = n_sa[idx(h, s, a)];
    return rew_sum[idx(h, s, a)] / (n >= 1.0 ? n : 1.0);
  }
};

// Clipped optimistic tables: Qhat = min{1, Rhat + b + Phat*Vhat}, all in [0,1].
struct OptimisticValueTable {
  int S = 0, A = 0, H = 0;
  std::vector<double> qhat;  // H*S*A
  std::vector<double> vhat;  // (H+1)*S
  double v(int h, int s) const { return vhat[std::size_t(h) * S + s]; }
  double q(int h, int s, int a) const {
    return qhat[(std::size_t(h) * S + s) * A + a];
  }
};

OptimisticValueTable optimistic_eval(const EmpiricalModel& model,
                                     const Policy& policy,
                                     const OmermSizes& sz);

enum class ImproveMode { Exhaustive, CoordinateAscent };

constexpr std::uint64_t kExhaustiveCap = 100000;  // max A^(S*H) enumerated

// Maximizes the average optimistic start value over the given task models.
// Exhaustive: exact argmax over deterministic policies (lexicographic ties).
// CoordinateAscent: backward sweeps; each (h,s) takes the action maximizing
// the unweighted task average of Qhat, tables recomputed as the sweep
// descends; stops at a fixpoint, after 50 sweeps, or if a sweep fails to
// improve the objective (the sweep is then reverted, keeping the
// objective trace non-decreasing).
Policy improve_policy(const std::vector<EmpiricalModel>& models,
                      const OmermSizes& sz, const Policy& prev,
                      ImproveMode mode, double* objective_out = nullptr);

struct OmermLogRow {
  std::uint64_t iter_k;
  int mdp_index;
  double avg_optimistic_value;
  double episode_return;
};

struct OmermOptions {
  ImproveMode mode = ImproveMode::CoordinateAscent;
  double C2 = 1.0;
  std::uint64_t K_override = 0;  // 0: paper schedule
  bool collect_log = false;
};

struct OmermResult {
  Policy policy;            // uniformly random iterate
  std::uint64_t K = 0;
  std::uint64_t picked_iterate = 0;  // 1-based
  std::vector<OmermLogRow> log;
};

// K = ceil(C2 * S^2*A*H^2 * ln(S*A*H/eps) / eps^2) unless overridden.
std::uint64_t omerm_schedule(int S, int A, int H, double epsilon, double C2);

OmermResult omerm_train(std::vector<EnvHandle>& envs, double epsilon,
                        RandomStream& rng, const OmermOptions& opt = {});

struct HighProbOptions {
  double C1 = 1.0;
  double C2 = 1.0;               // sizes the candidate-evaluation episodes
  std::uint64_t N_override = 0;  // task sample count
  double log_capacity_override = -1.0;  // proxy for log N^Pi
  OmermOptions train;
};

struct HighProbResult {
  Policy policy;
  int N = 0;
  int N1 = 0;
  std::uint64_t N2 = 0;
  int chosen = 0;
  std::vector<double> candidate_values;
  std::vector<int> task_indices;  // sampled support indices
};

// Sample N tasks once, train N1 = ceil(ln(2/delta)/ln 6) candidates at
// accuracy eps/2, pick the one with the highest average empirical value over
// all N tasks (N2 evaluation episodes per candidate-task pair).
HighProbResult omerm_high_prob(const MdpDistribution& dist, double epsilon,
                               double delta, RandomStream& rng,
                               const HighProbOptions& opt = {});

// Exact E_{M~D} V^pi and the gap to the best deterministic policy
// (exhaustive enumeration; throws if A^(S*H) > 1e6).
double expected_value(const MdpDistribution& dist, const Policy& pi);
std::pair<Policy, double> best_deterministic_policy(const MdpDistribution& dist);
double expected_suboptimality(const MdpDistribution& dist, const Policy& pi);

}  // namespace mtrl
