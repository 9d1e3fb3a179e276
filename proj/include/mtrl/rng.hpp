#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mtrl {

// SplitMix64 finalizer (Steele/Lea/Flood). Used both to mix seeds and as the
// output function of the counter-based stream below.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Counter-based generator: output i is mix64(key + i*kGolden). State is just
// (key, counter), so streams with distinct keys share nothing. Satisfies
// UniformRandomBitGenerator, but all distributions used in this project are
// implemented here so output bytes do not depend on the standard library.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream() : key_(0) {}
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<std::uint64_t>::max();
  }

  std::uint64_t operator()() { return mix64(key_ + (++ctr_) * kGolden); }
  std::uint64_t next_u64() { return (*this)(); }

  // [0,1) with 53 random mantissa bits.
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Standard normal via Box-Muller; consumes exactly two uniforms per call
  // (the sine partner is discarded to keep the draw count fixed).
  double normal() {
    double u = 1.0 - uniform01();  // (0,1], safe for log
    double v = uniform01();
    return std::sqrt(-2.0 * std::log(u)) *
           std::cos(2.0 * 3.14159265358979323846 * v);
  }

  // Uniform integer in [0,n) by 128-bit multiply-shift. n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be > 0");
    return std::uint64_t((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Index sampled from an (assumed normalized) probability vector.
  int categorical(const std::vector<double>& probs) {
    double u = uniform01();
    double acc = 0.0;
    int last_pos = -1;
    for (int i = 0; i < int(probs.size()); ++i) {
      if (probs[i] > 0.0) last_pos = i;
      acc += probs[i];
      if (u < acc) return i;
    }
    if (last_pos < 0)
      throw std::invalid_argument("categorical: all-zero probability vector");
    return last_pos;  // u landed in rounding slack at the top
  }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

// Independent stream per (master_seed, stream_id). Two mixing rounds so that
// nearby seeds and nearby ids land far apart in key space.
inline RandomStream derive_stream(std::uint64_t master_seed,
                                  std::uint64_t stream_id) {
  std::uint64_t k = mix64(master_seed ^ kGolden);
  k = mix64(k + mix64(stream_id + kGolden));
  return RandomStream(k);
}

// Fixed stream-id layout used by the experiment harness: role | seed | draw.
// Seeds and draws are taken modulo 2^20, which the harness never exceeds.
namespace streams {
constexpr std::uint64_t kInstanceGen = 1, kPretrain = 2, kTestEnv = 3,
                        kTestAlg = 4, kBaselineEnv = 5, kOmerm = 6,
                        kBandit = 7, kEval = 8, kDraw = 9;
}

inline std::uint64_t stream_id(std::uint64_t role, std::uint64_t seed = 0,
                               std::uint64_t draw = 0) {
  return (role << 40) | ((seed & 0xFFFFFULL) << 20) | (draw & 0xFFFFFULL);
}

}  // namespace mtrl
