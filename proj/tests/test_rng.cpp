#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "mtrl/rng.hpp"

using namespace mtrl;

TEST_CASE("derive_stream is deterministic") {
  RandomStream a = derive_stream(42, 0);
  RandomStream b = derive_stream(42, 0);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct stream ids give unrelated streams") {
  RandomStream a = derive_stream(42, 0);
  RandomStream b = derive_stream(42, 1);
  int differing = 0;
  for (int i = 0; i < 1000; ++i)
    if (a.next_u64() != b.next_u64()) ++differing;
  CHECK(differing >= 990);
}

TEST_CASE("ten streams are pairwise distinct") {
  std::vector<std::vector<std::uint64_t>> prefixes;
  for (int i = 0; i < 10; ++i) {
    RandomStream s = derive_stream(7, std::uint64_t(i));
    std::vector<std::uint64_t> p;
    for (int k = 0; k < 8; ++k) p.push_back(s.next_u64());
    prefixes.push_back(p);
  }
  for (int i = 0; i < 10; ++i)
    for (int j = i + 1; j < 10; ++j) CHECK(prefixes[i] != prefixes[j]);
}

TEST_CASE("stream_id packs role, seed, and draw without collisions") {
  std::set<std::uint64_t> ids;
  for (std::uint64_t role = 1; role <= 9; ++role)
    for (std::uint64_t seed : {0ull, 1ull, 19ull, 0xFFFFFull})
      for (std::uint64_t draw : {0ull, 1ull, 0xFFFFFull})
        ids.insert(stream_id(role, seed, draw));
  CHECK(ids.size() == 9u * 4u * 3u);
  CHECK(stream_id(streams::kPretrain, 3, 5) ==
        ((streams::kPretrain << 40) | (3ull << 20) | 5ull));
  // out-of-range seeds wrap modulo 2^20 instead of bleeding into other fields
  CHECK(stream_id(1, (1ull << 20) + 7, 0) == stream_id(1, 7, 0));
}

TEST_CASE("uniform01 lies in [0,1) and has the right mean") {
  RandomStream s = derive_stream(1, 100);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double u = s.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("normal has mean 0, variance 1, and consumes two uniforms") {
  RandomStream s = derive_stream(1, 101);
  double sum = 0.0, sumsq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double z = s.normal();
    sum += z;
    sumsq += z * z;
  }
  double mean = sum / n;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(sumsq / n - mean * mean - 1.0) < 0.05);

  RandomStream a = derive_stream(9, 5), b = derive_stream(9, 5);
  (void)a.normal();
  (void)b.uniform01();
  (void)b.uniform01();
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform_int respects bounds and covers the range") {
  RandomStream s = derive_stream(1, 102);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t v = s.uniform_int(7);
    REQUIRE(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
  CHECK_THROWS_AS(s.uniform_int(0), std::invalid_argument);
}

TEST_CASE("categorical matches its probability vector") {
  RandomStream s = derive_stream(1, 103);
  std::vector<double> probs{0.2, 0.3, 0.5};
  std::vector<int> hits(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++hits[std::size_t(s.categorical(probs))];
  for (int k = 0; k < 3; ++k)
    CHECK(std::abs(double(hits[std::size_t(k)]) / n - probs[std::size_t(k)]) <
          0.01);

  // zero-probability entries are never drawn
  std::vector<double> point{0.0, 1.0};
  for (int i = 0; i < 100; ++i) CHECK(s.categorical(point) == 1);
  std::vector<double> none{0.0, 0.0};
  CHECK_THROWS_AS(s.categorical(none), std::invalid_argument);
}
