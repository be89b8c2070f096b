#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>

#include "issa/hessian_sample.hpp"
#include "issa/linalg.hpp"
#include "issa/objectives.hpp"
#include "issa/rng.hpp"
#include "issa/trace.hpp"

/// Reference optimizers. They record the same TraceRow schema as ISSA, with
/// c_used holding the reciprocal of the step length actually taken.
namespace issa::baselines {

struct Options {
  std::size_t max_iters = 100;
  double grad_tol = 1e-10;
  std::optional<double> f_star;
  bool record_time = true;
};

/// x <- x - step * grad F(x)
RunResult gd_run(const ScaledObjective& objective, const linalg::Vector& x0, double step = 1.0,
                 const Options& options = {});

struct LissaConfig {
  std::size_t s1 = 1;  // directions averaged per iteration
  std::size_t s2 = 20;  // samples per direction
  double step = 1.0;

  void validate() const;
};

/// One depth-s2 direction: u <- g + (I - X_j) u from u = g, with j drawn
/// uniformly with replacement and X_j evaluated at x. s2 = 0 returns g.
linalg::Vector lissa_direction(const SampleOracle& oracle, const linalg::Vector& x,
                               const linalg::Vector& gradient, std::size_t s2, Xoshiro256& rng);

/// estimator_steps counts Hessian samples consumed so far.
RunResult lissa_run(const ScaledObjective& objective, const linalg::Vector& x0,
                    const LissaConfig& config, std::uint64_t seed, const Options& options = {});

/// Curvature pairs (s, y) for the two-loop recursion. Pairs with s^T y <= 0
/// are refused.
class LbfgsMemory {
 public:
  explicit LbfgsMemory(std::size_t capacity);

  /// Returns false (and stores nothing) when s^T y <= 0.
  bool push(linalg::Vector s, linalg::Vector y);
  std::size_t size() const { return pairs_.size(); }
  std::size_t capacity() const { return capacity_; }

  /// -H g with H the two-loop inverse approximation scaled by
  /// gamma = s^T y / y^T y of the newest pair (gamma = 1 when empty).
  linalg::Vector direction(const linalg::Vector& gradient) const;

 private:
  struct Pair {
    linalg::Vector s;
    linalg::Vector y;
    double rho;
  };
  std::size_t capacity_;
  std::deque<Pair> pairs_;
};

/// Dense BFGS inverse-Hessian approximation. Starts at I; the first accepted
/// pair rescales it to gamma I before updating.
class BfgsInverse {
 public:
  explicit BfgsInverse(std::size_t dim);

  bool update(const linalg::Vector& s, const linalg::Vector& y);
  linalg::Vector direction(const linalg::Vector& gradient) const;
  const linalg::Matrix& matrix() const { return h_; }

 private:
  linalg::Matrix h_;
  bool scaled_ = false;
};

inline constexpr double kArmijo = 1e-4;
inline constexpr double kBacktrack = 0.5;
inline constexpr int kMaxHalvings = 30;

/// Unit step with halving backtracking to an Armijo decrease. A direction
/// that is not a descent direction is replaced by -g for that iteration. The
/// run stops early if the line search finds no decrease.
RunResult lbfgs_run(const ScaledObjective& objective, const linalg::Vector& x0, std::size_t mem,
                    const Options& options = {});
RunResult bfgs_run(const ScaledObjective& objective, const linalg::Vector& x0,
                   const Options& options = {});

}  // namespace issa::baselines
