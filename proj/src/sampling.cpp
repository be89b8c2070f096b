#include "issa/sampling.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "issa/errors.hpp"

namespace issa {

namespace {

__extension__ using u128 = unsigned __int128;

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& s : s_) s = splitmix64(state);
}

std::uint64_t Xoshiro256::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t Xoshiro256::bounded(std::uint64_t bound) {
  if (bound == 0) throw UsageError("Xoshiro256::bounded: bound must be positive");
  u128 m = static_cast<u128>(next()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<u128>(next()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Xoshiro256::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Xoshiro256::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

void SamplingSpec::validate() const {
  if (n == 0) throw UsageError("SamplingSpec: population size must be at least 1");
  if (tau == 0 || tau > n) {
    throw UsageError("SamplingSpec: tau must satisfy 1 <= tau <= n (tau=" + std::to_string(tau) +
                     ", n=" + std::to_string(n) + ")");
  }
}

Draw::Draw(std::vector<std::size_t> indices, std::size_t n) : indices_(std::move(indices)) {
  std::vector<bool> seen(n, false);
  for (std::size_t i : indices_) {
    if (i >= n) throw UsageError("Draw: index " + std::to_string(i) + " out of range");
    if (seen[i]) throw UsageError("Draw: repeated index " + std::to_string(i));
    seen[i] = true;
  }
}

OrderedSampler::OrderedSampler(const SamplingSpec& spec) : spec_(spec), rng_(spec.seed) {
  spec_.validate();
  pool_.resize(spec_.n);
  std::iota(pool_.begin(), pool_.end(), std::size_t{0});
}

Draw OrderedSampler::draw() { return draw(spec_.tau); }

Draw OrderedSampler::draw(std::size_t count) {
  if (count == 0 || count > spec_.n) {
    throw UsageError("OrderedSampler::draw: count must satisfy 1 <= count <= n");
  }
  Draw out;
  out.indices_.reserve(count);
  const std::size_t n = pool_.size();
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng_.bounded(n - i));
    std::swap(pool_[i], pool_[j]);
    out.indices_.push_back(pool_[i]);
  }
  return out;
}

}  // namespace issa
