#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "issa/estimator.hpp"
#include "issa/objectives.hpp"
#include "issa/trace.hpp"

namespace issa {

enum class Variant { practical, theoretical, online };
enum class StepMode { theorem1, fixed };

const char* to_string(Variant variant);
const char* to_string(StepMode mode);

/// Gradient mini-batching for the online variant. The batch size grows as
/// b_{k+1} = min(n, ceil(growth * b_k)).
struct OnlineConfig {
  std::size_t grad_batch0 = 16;
  double growth = 1.0;
  std::uint64_t grad_seed = 1;
};

struct RunConfig {
  Variant variant = Variant::practical;
  std::size_t tau = 5;
  StepMode step_mode = StepMode::fixed;
  double c_fixed = 1.0;
  std::size_t max_iters = 100;
  double grad_tol = 1e-10;
  std::uint64_t seed = 0;
  /// Rebuild-branch history cap; kNoTruncation keeps everything.
  std::size_t truncate_cap = kDefaultTruncateCap;
  OnlineConfig online;
  /// Fill TraceRow::wall_ms. Off for byte-reproducible traces.
  bool record_time = true;

  void validate() const;
};

/// Step divisor that guarantees linear convergence after m = k*tau samples:
///   c = [beta (2-alpha)^2 + beta (2-alpha)(1-alpha)^m] / [(1-alpha)^2 - (1-alpha)^{2m}]
/// m may be +infinity. Throws NumericError when the denominator is not
/// positive (m <= 1 or alpha = 1); callers fall back to step_size_limit.
double step_size_theorem1(double alpha, double beta, double m);
/// c_inf = beta (2-alpha)^2 / (1-alpha)^2
double step_size_limit(double alpha, double beta);
/// step_size_theorem1, or step_size_limit where the former is undefined.
double step_size_or_limit(double alpha, double beta, double m);

/// Guaranteed contraction: E[F(x+) - F*] <= (1 - mu)(F(x) - F*) with
///   mu = (1-alpha)^4 alpha / (beta (2-alpha)^2 ((2-alpha) + alpha^2 (1-alpha)^m))
double compute_mu(double alpha, double beta, double m);

/// Gradient-norm window in which c = 1 steps square the gradient norm in
/// expectation: [beta (1-alpha)^m / 2 + alpha beta (beta-alpha) / 4, alpha^2 / (8 beta)].
struct RegimeWindow {
  double lower = 0.0;
  double upper = 0.0;
  bool empty() const { return !(lower <= upper); }
  bool contains(double grad_norm) const { return lower <= grad_norm && grad_norm <= upper; }
};

RegimeWindow quad_regime_window(double alpha, double beta, double m);
bool quad_regime_check(double grad_norm, double alpha, double beta, double m);

/// x - (1/c) R grad F(x)
linalg::Vector issa_step(const ScaledObjective& objective, const linalg::Vector& x,
                         const linalg::Matrix& r, double c);
/// Same with a precomputed gradient.
linalg::Vector issa_step(const linalg::Vector& x, const linalg::Matrix& r,
                         const linalg::Vector& gradient, double c);

/// Full-gradient ISSA (practical or theoretical variant). f_star, when known,
/// fills the subopt column. Deterministic given config.seed.
RunResult run(const RunConfig& config, const ScaledObjective& objective, const linalg::Vector& x0,
              std::optional<double> f_star = std::nullopt);

/// ISSA with mini-batch gradients drawn by a second, independently seeded
/// sampler. A seed shared with the Hessian sampler is rejected.
RunResult online_run(const RunConfig& config, const ScaledObjective& objective,
                     const linalg::Vector& x0, std::optional<double> f_star = std::nullopt);

}  // namespace issa
