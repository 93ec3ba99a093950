#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace neurokey::rng {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Deterministic generator. mt19937_64 output is fully specified by the
// standard; the double/gaussian derivations below avoid the
// implementation-defined std distributions so results are bit-reproducible.
class Prng {
 public:
  explicit Prng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform01() { return double(gen_() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1].
  double uniform01_pos() { return double((gen_() >> 11) + 1) * 0x1.0p-53; }

  // Box-Muller, one variate per call.
  double gaussian() {
    double u1 = uniform01_pos();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace neurokey::rng
