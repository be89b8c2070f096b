#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "issa/rng.hpp"

namespace issa {

/// Ordered tau-independent sampling over the population [0, n).
struct SamplingSpec {
  std::size_t n = 1;
  std::size_t tau = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One outcome of an ordered sampling: tau distinct indices, order significant.
class Draw {
 public:
  Draw() = default;
  /// Throws UsageError if indices repeat or fall outside [0, n).
  Draw(std::vector<std::size_t> indices, std::size_t n);

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  std::span<const std::size_t> indices() const { return indices_; }
  std::size_t operator[](std::size_t i) const { return indices_[i]; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  bool operator==(const Draw&) const = default;

 private:
  friend class OrderedSampler;
  std::vector<std::size_t> indices_;
};

/// Seeded stream of draws. Each outcome among the n!/(n-tau)! ordered
/// tau-subsets is equally likely: a partial Fisher-Yates shuffle of length tau
/// runs over a persistent pool, which costs O(tau) per draw.
class OrderedSampler {
 public:
  explicit OrderedSampler(const SamplingSpec& spec);

  Draw draw();
  /// Draw with a size other than spec().tau (the online gradient batch grows).
  Draw draw(std::size_t count);

  const SamplingSpec& spec() const { return spec_; }

 private:
  SamplingSpec spec_;
  Xoshiro256 rng_;
  std::vector<std::size_t> pool_;
};

}  // namespace issa
