#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mtrl/rng.hpp"

namespace mtrl {

enum class NoiseKind { Deterministic, Gaussian, Bernoulli };

struct NoiseModel {
  NoiseKind kind = NoiseKind::Deterministic;
  double sigma = 0.0;  // Gaussian only
};

// Episodic tabular MDP with step-dependent dynamics. All arrays are dense,
// indexed (h,s,a[,s']) with h in [0,H). Mean total reward along any
// positive-probability trajectory must be <= 1 (validated, not assumed).
struct TabularMdp {
  int S = 0, A = 0, H = 0;
  int s1 = 0;
  NoiseModel noise;
  std::vector<double> P;  // H*S*A*S, transition rows
  std::vector<double> r;  // H*S*A, mean rewards

  TabularMdp() = default;
  TabularMdp(int S_, int A_, int H_, int s1_ = 0,
             NoiseModel noise_ = NoiseModel{})
      : S(S_), A(A_), H(H_), s1(s1_), noise(noise_),
        P(std::size_t(H_) * S_ * A_ * S_, 0.0),
        r(std::size_t(H_) * S_ * A_, 0.0) {}

  std::size_t pidx(int h, int s, int a, int s2) const {
    return ((std::size_t(h) * S + s) * A + a) * S + s2;
  }
  std::size_t ridx(int h, int s, int a) const {
    return (std::size_t(h) * S + s) * A + a;
  }
  double& p(int h, int s, int a, int s2) { return P[pidx(h, s, a, s2)]; }
  double p(int h, int s, int a, int s2) const { return P[pidx(h, s, a, s2)]; }
  double& rew(int h, int s, int a) { return r[ridx(h, s, a)]; }
  double rew(int h, int s, int a) const { return r[ridx(h, s, a)]; }
};

// Stochastic tabular policy: action distribution per (h,s).
struct Policy {
  int S = 0, A = 0, H = 0;
  std::vector<double> probs;  // H*S*A

  Policy() = default;
  Policy(int S_, int A_, int H_)
      : S(S_), A(A_), H(H_), probs(std::size_t(H_) * S_ * A_, 0.0) {}

  std::size_t idx(int h, int s, int a) const {
    return (std::size_t(h) * S + s) * A + a;
  }
  double& at(int h, int s, int a) { return probs[idx(h, s, a)]; }
  double at(int h, int s, int a) const { return probs[idx(h, s, a)]; }

  static Policy uniform(int S, int A, int H);
  // actions[h*S+s] = deterministic action at (h,s).
  static Policy from_actions(int S, int A, int H,
                             const std::vector<int>& actions);
  bool same_shape(int S_, int A_, int H_) const {
    return S == S_ && A == A_ && H == H_;
  }
};

struct Trajectory {
  std::vector<int> states;    // s_h for h=0..H-1
  std::vector<int> actions;   // a_h
  std::vector<double> rewards;  // realized r_h
  int final_state = 0;
  double total_return = 0.0;
};

// V[h][s] for h=0..H (row H all zero) and Q[h][s][a] for h=0..H-1.
struct ValueTable {
  int S = 0, A = 0, H = 0;
  std::vector<double> V;  // (H+1)*S
  std::vector<double> Q;  // H*S*A

  double v(int h, int s) const { return V[std::size_t(h) * S + s]; }
  double q(int h, int s, int a) const {
    return Q[(std::size_t(h) * S + s) * A + a];
  }
};

struct ValidationReport {
  bool ok = true;
  double u1 = 0.0;  // Assumption-1 bound at the initial state
  std::vector<std::string> errors;
};

// Reports every violated invariant with its location; never throws.
ValidationReport validate_mdp(const TabularMdp& mdp, double tol = 1e-9);

// Renormalizes transition rows whose sums are within tol of 1.
// Returns false (and leaves the row untouched) if any row is further off.
bool normalize_transitions(TabularMdp& mdp, double tol = 1e-9);

// Exact Bellman evaluation of a policy. Throws on shape mismatch.
ValueTable exact_value(const TabularMdp& mdp, const Policy& policy);
double exact_value_start(const TabularMdp& mdp, const Policy& policy);

// Backward-induction greedy planning; ties break to the lowest action index.
std::pair<Policy, ValueTable> optimal_policy(const TabularMdp& mdp);

// U_1(s1): max total mean reward over positive-probability trajectories.
double assumption1_bound(const TabularMdp& mdp);

// One episode. Per step the stream is consumed in a fixed order:
// action draw, reward noise (Gaussian consumes two uniforms, Bernoulli one,
// Deterministic none), next-state draw.
Trajectory simulate_episode(const TabularMdp& mdp, const Policy& policy,
                            RandomStream& rng);

// max over (h,s) of the L1 distance between action distributions; in [0,2].
double policy_distance(const Policy& a, const Policy& b);

// Deterministic-policy enumeration. Policies are ranked lexicographically by
// the action tuple over cells (h,s) in row-major order, rank 0 = all zeros.
std::uint64_t deterministic_policy_count(int S, int A, int H,
                                         std::uint64_t cap);
Policy policy_from_rank(int S, int A, int H, std::uint64_t rank);

// JSON (de)serialization; round-trips values exactly.
std::string mdp_to_json(const TabularMdp& mdp, int indent = -1);
TabularMdp mdp_from_json(const std::string& text);

std::string policy_to_json_fragment(const Policy& p);

}  // namespace mtrl
