#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mtrl/mdp.hpp"
#include "mtrl/rng.hpp"

namespace mtrl {

// Finite task distribution over a shared-(S,A,H) support. Members are held by
// shared_ptr so sampled tasks alias the support (cheap, and pointer identity
// doubles as a support-membership key for white-box memoization).
struct MdpDistribution {
  std::vector<double> probs;
  std::vector<std::shared_ptr<const TabularMdp>> mdps;

  int size() const { return int(mdps.size()); }
  const TabularMdp& member(int i) const { return *mdps[i]; }
};

// Checks the distribution invariants (prob vector, shared shape, member
// validity); returns a list of problems, empty when fine.
std::vector<std::string> validate_distribution(const MdpDistribution& d,
                                               double tol = 1e-9);

int sample_index(const MdpDistribution& d, RandomStream& rng);

// C(D): size of the smallest sub-support with probability >= 1-delta.
// Descending-sort prefix; provably minimal, brute force lives in tests only.
int complexity_measure(const MdpDistribution& d, double delta);
int complexity_from_probs(const std::vector<double>& probs, double delta);

// M one-step bandit MDPs over M actions; member i pays 1 on action i, else 0.
// Deterministic rewards, uniform probabilities.
MdpDistribution gen_proposition1_instance(int M);

// Uniform over M Gaussian(1) one-step bandits; member i has arm means
// 1/2 + delta_gap on arm i and 1/2 elsewhere. delta_gap in (0, 1/2].
MdpDistribution gen_theorem3_instance(int M, double delta_gap);

// probs[i] proportional to exp(-lambda*(i+1)) over the given family.
MdpDistribution gen_exponential_tail(
    std::vector<std::shared_ptr<const TabularMdp>> family, double lambda);

// num_mdps random tabular MDPs: Dirichlet(1) transition rows, uniform raw
// rewards rescaled so the Assumption-1 bound U_1(s1) is exactly 1.
MdpDistribution gen_random_tabular(int S, int A, int H, int num_mdps,
                                   RandomStream& rng,
                                   NoiseKind noise = NoiseKind::Bernoulli);

std::string distribution_to_json(const MdpDistribution& d, int indent = -1);
MdpDistribution distribution_from_json(const std::string& text);

}  // namespace mtrl
