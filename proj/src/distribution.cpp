#include "mtrl/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json_io.hpp"

namespace mtrl {

std::vector<std::string> validate_distribution(const MdpDistribution& d,
                                               double tol) {
  std::vector<std::string> problems;
  if (d.probs.size() != d.mdps.size())
    problems.push_back("probs/support size mismatch");
  if (d.mdps.empty()) problems.push_back("empty support");
  double sum = 0.0;
  for (double p : d.probs) {
    if (p < 0.0) problems.push_back("negative probability");
    sum += p;
  }
  if (!d.probs.empty() && std::abs(sum - 1.0) > tol)
    problems.push_back("probabilities sum to " + std::to_string(sum));
  for (std::size_t i = 0; i < d.mdps.size(); ++i) {
    if (!d.mdps[i]) {
      problems.push_back("null member " + std::to_string(i));
      continue;
    }
    const TabularMdp& m = *d.mdps[i];
    if (i > 0 && (m.S != d.mdps[0]->S || m.A != d.mdps[0]->A ||
                  m.H != d.mdps[0]->H))
      problems.push_back("member " + std::to_string(i) +
                         " has a different (S,A,H)");
    ValidationReport rep = validate_mdp(m, tol);
    for (const auto& e : rep.errors)
      problems.push_back("member " + std::to_string(i) + ": " + e);
  }
  return problems;
}

int sample_index(const MdpDistribution& d, RandomStream& rng) {
  return rng.categorical(d.probs);
}

int complexity_from_probs(const std::vector<double>& probs, double delta) {
  if (delta < 0.0 || delta >= 1.0)
    throw std::invalid_argument("complexity_measure: delta must be in [0,1)");
  std::vector<double> p = probs;
  std::sort(p.begin(), p.end(), std::greater<double>());
  double acc = 0.0;
  for (int i = 0; i < int(p.size()); ++i) {
    acc += p[i];
    if (acc >= 1.0 - delta) return i + 1;
  }
  return int(p.size());  // rounding slack: all of the support
}

int complexity_measure(const MdpDistribution& d, double delta) {
  return complexity_from_probs(d.probs, delta);
}

MdpDistribution gen_proposition1_instance(int M) {
  if (M < 2) throw std::invalid_argument("gen_proposition1_instance: M >= 2");
  MdpDistribution d;
  for (int i = 0; i < M; ++i) {
    auto m = std::make_shared<TabularMdp>(1, M, 1, 0);
    for (int a = 0; a < M; ++a) m->p(0, 0, a, 0) = 1.0;
    m->rew(0, 0, i) = 1.0;
    d.mdps.push_back(std::move(m));
    d.probs.push_back(1.0 / M);
  }
  return d;
}

MdpDistribution gen_theorem3_instance(int M, double delta_gap) {
  if (M < 2) throw std::invalid_argument("gen_theorem3_instance: M >= 2");
  if (!(delta_gap > 0.0 && delta_gap <= 0.5))
    throw std::invalid_argument("gen_theorem3_instance: gap in (0, 1/2]");
  MdpDistribution d;
  for (int i = 0; i < M; ++i) {
    auto m = std::make_shared<TabularMdp>(1, M, 1, 0,
                                          NoiseModel{NoiseKind::Gaussian, 1.0});
    for (int a = 0; a < M; ++a) {
      m->p(0, 0, a, 0) = 1.0;
      m->rew(0, 0, a) = 0.5 + (a == i ? delta_gap : 0.0);
    }
    d.mdps.push_back(std::move(m));
    d.probs.push_back(1.0 / M);
  }
  return d;
}

MdpDistribution gen_exponential_tail(
    std::vector<std::shared_ptr<const TabularMdp>> family, double lambda) {
  if (family.empty())
    throw std::invalid_argument("gen_exponential_tail: empty family");
  if (!(lambda > 0.0))
    throw std::invalid_argument("gen_exponential_tail: lambda must be > 0");
  MdpDistribution d;
  d.mdps = std::move(family);
  double sum = 0.0;
  for (std::size_t i = 0; i < d.mdps.size(); ++i) {
    double w = std::exp(-lambda * double(i + 1));
    d.probs.push_back(w);
    sum += w;
  }
  for (double& p : d.probs) p /= sum;
  return d;
}

MdpDistribution gen_random_tabular(int S, int A, int H, int num_mdps,
                                   RandomStream& rng, NoiseKind noise) {
  if (S < 1 || A < 1 || H < 1 || num_mdps < 1)
    throw std::invalid_argument("gen_random_tabular: sizes must be >= 1");
  MdpDistribution d;
  for (int i = 0; i < num_mdps; ++i) {
    NoiseModel nm;
    nm.kind = noise;
    if (noise == NoiseKind::Gaussian) nm.sigma = 1.0;
    auto m = std::make_shared<TabularMdp>(S, A, H, 0, nm);
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          // Dirichlet(1,...,1) row via normalized exponentials.
          double sum = 0.0;
          for (int s2 = 0; s2 < S; ++s2) {
            double g = -std::log(1.0 - rng.uniform01());
            m->p(h, s, a, s2) = g;
            sum += g;
          }
          for (int s2 = 0; s2 < S; ++s2) m->p(h, s, a, s2) /= sum;
          m->rew(h, s, a) = rng.uniform01();
        }
    double u = assumption1_bound(*m);
    for (double& x : m->r) x /= u;
    d.mdps.push_back(std::move(m));
    d.probs.push_back(1.0 / num_mdps);
  }
  return d;
}

std::string distribution_to_json(const MdpDistribution& d, int indent) {
  nlohmann::json j;
  j["probs"] = d.probs;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : d.mdps) arr.push_back(mdp_to_json_obj(*m));
  j["mdps"] = std::move(arr);
  return j.dump(indent);
}

MdpDistribution distribution_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  MdpDistribution d;
  d.probs = j.at("probs").get<std::vector<double>>();
  for (const auto& jm : j.at("mdps"))
    d.mdps.push_back(std::make_shared<TabularMdp>(mdp_from_json_obj(jm)));
  return d;
}

}  // namespace mtrl
