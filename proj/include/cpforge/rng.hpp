#pragma once

#include <cstdint>

namespace cpforge {

// SplitMix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

// Stateless SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Sub-seed for stream `stream` of a run seeded with `seed`:
// mix64(seed ^ mix64(stream + 0x9E3779B97F4A7C15)). Used to give every
// dataset id / generation attempt its own independent generator.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// xoshiro256** 1.0 seeded by four SplitMix64 draws from the seed.
// All derived distributions below are implemented here (not via <random>)
// so that sampled data is bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

  // Uniform integer in [0, n). n must be > 0. Lemire's nearly-divisionless
  // method with rejection, so the result is exactly uniform.
  std::uint64_t below(std::uint64_t n);

  // Uniform integer in [lo, hi], inclusive.
  int range(int lo, int hi);

  bool bernoulli(double p) { return uniform() < p; }

  // Knuth's product-of-uniforms Poisson sampler; fine for small means.
  int poisson(double mean);

 private:
  std::uint64_t s_[4];
};

}  // namespace cpforge
