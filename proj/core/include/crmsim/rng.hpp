#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace crmsim {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic RNG wrapper. Draw helpers avoid std::*_distribution,
// whose output is implementation-defined; identical seeds must give
// identical traces on any conforming stdlib.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(splitmix64(seed ^ splitmix64(stream))) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound] inclusive.
  std::uint64_t uniform_inclusive(std::uint64_t bound) {
    return next_u64() % (bound + 1);
  }

  // Uniform double in (0, 1).
  double uniform_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_unit(); }

  // Exponential inter-arrival draw with the given mean.
  double exponential(double mean) { return -mean * std::log(uniform_unit()); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace crmsim
