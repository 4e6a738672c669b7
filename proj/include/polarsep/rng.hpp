#pragma once

#include <cstdint>

namespace polarsep {

// Mixes two 64-bit values into a well-distributed seed (splitmix64 core).
std::uint64_t mix64(std::uint64_t a, std::uint64_t b);

// Deterministic xoshiro256++ generator with splitmix64 seeding.
//
// The generator and every distribution below are spelled out explicitly so
// that streams are bit-stable across compilers and standard libraries;
// std::uniform_*_distribution is implementation-defined and must not be
// used anywhere reproducibility matters.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform();
  // Uniform double in [lo, hi).
  double uniform(double lo, double hi);
  // Uniform integer in [0, n); n > 0.
  std::uint64_t uniform_below(std::uint64_t n);
  bool bernoulli(double p);
  // Box-Muller transform.
  double normal(double mean, double stddev);

  // Independent stream derived from this generator's original seed and a
  // stream id. Forking does not consume or depend on draw position, so a
  // stage can be toggled without shifting the draws of other stages.
  Rng fork(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t s_[4] = {0, 0, 0, 0};
};

}  // namespace polarsep
