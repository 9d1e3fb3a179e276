#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "mtrl/distribution.hpp"
#include "mtrl/omerm.hpp"
#include "mtrl/rng.hpp"

using namespace mtrl;

namespace {

// Exhaustive-subset oracle for the complexity measure (supports <= 20).
int brute_complexity(const std::vector<double>& probs, double delta) {
  int n = int(probs.size());
  int best = n;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    double total = 0.0;
    int cnt = 0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        total += probs[std::size_t(i)];
        ++cnt;
      }
    if (total >= 1.0 - delta && cnt < best) best = cnt;
  }
  return best;
}

std::vector<double> random_probs(int n, RandomStream& rng) {
  std::vector<double> p(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (double& x : p) {
    x = -std::log(1.0 - rng.uniform01());
    sum += x;
  }
  for (double& x : p) x /= sum;
  return p;
}

}  // namespace

TEST_CASE("complexity_measure frozen examples") {
  CHECK(complexity_from_probs({0.5, 0.3, 0.1, 0.05, 0.05}, 0.1) == 3);
  CHECK(brute_complexity({0.5, 0.3, 0.1, 0.05, 0.05}, 0.1) == 3);
  CHECK(complexity_from_probs({0.95, 0.05}, 0.1) == 1);
  std::vector<double> uniform8(8, 0.125);
  CHECK(complexity_from_probs(uniform8, 0.0) == 8);
  CHECK_THROWS_AS(complexity_from_probs({1.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(complexity_from_probs({1.0}, -0.1), std::invalid_argument);
}

TEST_CASE("complexity_measure equals the exhaustive-subset minimum") {
  RandomStream rng = derive_stream(21, 0);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + int(rng.uniform_int(11));  // support size 2..12
    std::vector<double> p = random_probs(n, rng);
    double delta = rng.uniform(0.02, 0.5);
    CHECK(complexity_from_probs(p, delta) == brute_complexity(p, delta));
  }
}

TEST_CASE("complexity_measure is non-increasing in delta") {
  RandomStream rng = derive_stream(21, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p = random_probs(10, rng);
    int prev = complexity_from_probs(p, 0.0);
    for (double delta : {0.05, 0.1, 0.2, 0.4, 0.8}) {
      int c = complexity_from_probs(p, delta);
      CHECK(c <= prev);
      prev = c;
    }
  }
}

TEST_CASE("sample_index follows the probability vector") {
  MdpDistribution single = gen_proposition1_instance(2);
  single.probs = {1.0, 0.0};
  RandomStream rng = derive_stream(21, 2);
  for (int i = 0; i < 200; ++i) CHECK(sample_index(single, rng) == 0);

  MdpDistribution even = gen_proposition1_instance(2);
  int zero = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    if (sample_index(even, rng) == 0) ++zero;
  CHECK(std::abs(double(zero) / n - 0.5) < 0.01);
}

TEST_CASE("proposition-1 instances match the construction") {
  CHECK_THROWS_AS(gen_proposition1_instance(1), std::invalid_argument);
  MdpDistribution d = gen_proposition1_instance(2);
  CHECK(d.member(0).rew(0, 0, 0) == 1.0);
  CHECK(d.member(0).rew(0, 0, 1) == 0.0);
  CHECK(d.member(1).rew(0, 0, 0) == 0.0);
  CHECK(d.member(1).rew(0, 0, 1) == 1.0);
  CHECK(validate_distribution(d).empty());

  MdpDistribution d3 = gen_proposition1_instance(3);
  for (int i = 0; i < 3; ++i) {
    auto [pi, t] = optimal_policy(d3.member(i));
    CHECK(t.v(0, 0) == doctest::Approx(1.0));
    CHECK(d3.probs[std::size_t(i)] == doctest::Approx(1.0 / 3));
  }
  // best single deployed policy only gets the collision mass 1/M
  auto [best, value] = best_deterministic_policy(d3);
  CHECK(value == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("theorem-3 instances match the construction") {
  MdpDistribution d = gen_theorem3_instance(3, 0.2);
  const TabularMdp& nu2 = d.member(1);
  CHECK(nu2.rew(0, 0, 0) == doctest::Approx(0.5));
  CHECK(nu2.rew(0, 0, 1) == doctest::Approx(0.7));
  CHECK(nu2.rew(0, 0, 2) == doctest::Approx(0.5));
  CHECK(nu2.noise.kind == NoiseKind::Gaussian);
  CHECK(nu2.noise.sigma == 1.0);
  for (int i = 0; i < 3; ++i) {
    auto [pi, t] = optimal_policy(d.member(i));
    CHECK(pi.at(0, 0, i) == 1.0);
    for (int a = 0; a < 3; ++a)
      if (a != i)
        CHECK(t.q(0, 0, i) - t.q(0, 0, a) == doctest::Approx(0.2));
  }

  MdpDistribution edge = gen_theorem3_instance(2, 0.5);
  CHECK(edge.member(0).rew(0, 0, 0) == doctest::Approx(1.0));
  CHECK(edge.member(0).rew(0, 0, 1) == doctest::Approx(0.5));
  CHECK(edge.member(1).rew(0, 0, 0) == doctest::Approx(0.5));
  CHECK(edge.member(1).rew(0, 0, 1) == doctest::Approx(1.0));

  CHECK_THROWS_AS(gen_theorem3_instance(3, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(gen_theorem3_instance(3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gen_theorem3_instance(1, 0.2), std::invalid_argument);
}

TEST_CASE("exponential tail weights decay geometrically") {
  MdpDistribution base = gen_proposition1_instance(2);
  std::vector<std::shared_ptr<const TabularMdp>> family;
  for (int i = 0; i < 50; ++i) family.push_back(base.mdps[std::size_t(i % 2)]);

  MdpDistribution d = gen_exponential_tail(family, 1.0);
  REQUIRE(d.size() == 50);
  for (int i = 0; i + 1 < 50; ++i)
    CHECK(d.probs[std::size_t(i + 1)] / d.probs[std::size_t(i)] ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  int c = complexity_measure(d, 0.01);
  CHECK(c >= 4);
  CHECK(c <= 6);

  MdpDistribution sharp = gen_exponential_tail(family, 40.0);
  CHECK(sharp.probs[0] > 0.999999);

  CHECK_THROWS_AS(gen_exponential_tail(family, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gen_exponential_tail({}, 1.0), std::invalid_argument);
}

TEST_CASE("random tabular generation hits the Assumption-1 bound") {
  RandomStream rng = derive_stream(21, 3);
  MdpDistribution d = gen_random_tabular(4, 3, 3, 5, rng);
  REQUIRE(d.size() == 5);
  CHECK(validate_distribution(d).empty());
  for (int i = 0; i < d.size(); ++i) {
    CHECK(std::abs(assumption1_bound(d.member(i)) - 1.0) < 1e-9);
    CHECK(d.probs[std::size_t(i)] == doctest::Approx(0.2));
  }

  RandomStream r1 = derive_stream(21, 4), r2 = derive_stream(21, 4);
  MdpDistribution a = gen_random_tabular(3, 2, 2, 2, r1);
  MdpDistribution b = gen_random_tabular(3, 2, 2, 2, r2);
  CHECK(distribution_to_json(a) == distribution_to_json(b));

  MdpDistribution one = gen_random_tabular(2, 2, 2, 1, rng);
  for (double delta : {0.0, 0.3, 0.9})
    CHECK(complexity_measure(one, delta) == 1);
}

TEST_CASE("validate_distribution reports broken inputs") {
  MdpDistribution d = gen_proposition1_instance(2);
  d.probs = {0.7, 0.7};
  CHECK_FALSE(validate_distribution(d).empty());

  MdpDistribution mixed = gen_proposition1_instance(2);
  MdpDistribution other = gen_proposition1_instance(3);
  mixed.mdps[1] = other.mdps[0];
  CHECK_FALSE(validate_distribution(mixed).empty());
}

TEST_CASE("distribution JSON round-trips") {
  MdpDistribution d = gen_theorem3_instance(3, 0.25);
  MdpDistribution back = distribution_from_json(distribution_to_json(d, 2));
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.probs.size(); ++i)
    CHECK(back.probs[i] == d.probs[i]);
  for (int i = 0; i < d.size(); ++i) {
    CHECK(back.member(i).r == d.member(i).r);
    CHECK(back.member(i).P == d.member(i).P);
    CHECK(back.member(i).noise.kind == d.member(i).noise.kind);
  }
}
