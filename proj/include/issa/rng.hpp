#pragma once

#include <cstdint>
#include <limits>

namespace issa {

/// SplitMix64 step; used for seeding and for deriving stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the stream `stream` derived from a base seed. Distinct (seed, stream)
/// pairs give unrelated generators, so Monte Carlo trials can run in any order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = stream ^ 0x6a09e667f3bcc909ULL;
  const std::uint64_t mixed = splitmix64(s);
  std::uint64_t t = seed ^ mixed;
  return splitmix64(t);
}

/// xoshiro256** 1.0 (Blackman & Vigna), seeded by SplitMix64.
///
/// All derived draws (bounded integers, uniforms, normals) are computed here
/// rather than through <random> distributions, whose output is
/// implementation-defined; a seed therefore reproduces the same sequence on
/// every platform.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }
  std::uint64_t next();

  /// Uniform integer in [0, bound), Lemire's nearly-divisionless method.
  std::uint64_t bounded(std::uint64_t bound);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal, Marsaglia polar method.
  double normal();

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace issa
