#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace partpose {

/// Deterministic RNG wrapper. Gaussian draws go through a fixed Box-Muller
/// transform instead of std::normal_distribution, whose output is
/// implementation-defined; runs are reproducible for a given libm.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller (one draw per call, no cached spare).
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n);

private:
  std::mt19937_64 gen_;
};

/// Stable seed derivation: mixes a base seed with a tag and an index so
/// independent streams (per object, per pose, ...) never collide.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index);

}  // namespace partpose
