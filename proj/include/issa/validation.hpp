#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "issa/hessian_sample.hpp"
#include "issa/linalg.hpp"
#include "issa/objectives.hpp"
#include "issa/optimizer.hpp"
#include "issa/rng.hpp"

/// Executable versions of the estimator and convergence bounds.
///
/// Monte Carlo trials run in parallel. Trial t draws from the stream
/// derive_seed(seed, t), so reports do not depend on thread scheduling.
namespace issa::validation {

enum class Quantity { approx_error, first_moment_lambda_max, second_moment_lambda_max };

const char* to_string(Quantity quantity);

struct MomentReport {
  Quantity quantity = Quantity::approx_error;
  double empirical = 0.0;
  /// Standard error of `empirical`; 0 for deterministic checks.
  double std_error = 0.0;
  double bound = 0.0;
  std::size_t trials = 0;
  std::size_t m = 0;
  double alpha = 0.0;
  bool pass = false;
};

/// Deterministic checks are allowed this much relative rounding slack.
inline constexpr double kRoundingSlack = 1e-12;

/// ||expected_estimator(H, m) - H^{-1}||_2 against (1 - alpha)^m / alpha.
MomentReport check_approx_bound(const linalg::SymMatrix& h, std::size_t m, double alpha);

/// lambda_max(-E[R^m]) against
///   -(1-alpha)^2 (1 - (1-alpha)^{2m-2}) / (2 alpha - alpha^2).
/// Requires m >= 1.
MomentReport check_first_moment(const linalg::SymMatrix& h, std::size_t m, double alpha);

/// Monte Carlo lambda_max(E[R^T R]) over `trials` independent builds of R
/// from m samples at x, against (2 - alpha)/alpha^2 + (1 - alpha)^m with 3
/// standard errors of slack. The standard error is that of v^T R^T R v for
/// the top eigenvector v of the mean. Samples come in ordered draws of tau;
/// tau = 1 makes them independent. A diverging build fails the check with
/// empirical = inf. Requires trials >= 100.
MomentReport check_second_moment(const SampleOracle& oracle, const linalg::Vector& x,
                                 std::size_t m, double alpha, std::size_t trials,
                                 std::uint64_t seed, std::size_t tau = 1);
MomentReport check_second_moment(const ScaledObjective& objective, const linalg::Vector& x,
                                 std::size_t m, std::size_t trials, std::uint64_t seed,
                                 std::size_t tau = 1);

/// Monte Carlo mean of R^m against sum_{j=0}^{m} (I - H)^j, H the full
/// Hessian at x. D = mean - expected and SE is the matrix of per-entry
/// standard errors; pass iff ||D||_2 <= 4 ||SE||_2.
struct ExpectationReport {
  double deviation_norm = 0.0;
  double std_error_norm = 0.0;
  /// max_ij |D_ij| / SE_ij
  double max_z = 0.0;
  std::size_t trials = 0;
  std::size_t m = 0;
  bool pass = false;
};

ExpectationReport check_expectation(const ScaledObjective& objective, const linalg::Vector& x,
                                    std::size_t m, std::size_t trials, std::uint64_t seed,
                                    std::size_t tau = 1);

/// One resampled step from a common iterate.
struct StepCheck {
  std::size_t k = 0;
  double subopt = 0.0;
  double grad_norm = 0.0;
  /// Contraction: mean of F(x^k) - F(x^{k+1}). Regime: mean of ||grad F(x^{k+1})||.
  double mean = 0.0;
  double std_error = 0.0;
  /// Contraction: mu * subopt. Regime: 4 (beta/alpha^2) ||grad F(x^k)||^2.
  double required = 0.0;
  bool pass = false;
};

struct ContractionReport {
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t tau = 0;
  std::size_t trials = 0;
  std::vector<StepCheck> steps;
  bool pass = false;
};

/// For k = 1..steps, resamples the k-th step (R from k*tau fresh samples, c
/// from step_size_or_limit at m = k*tau) `trials` times from a common x^k and
/// requires mean decrease >= mu * (F(x^k) - F*) - 4 stderr. The common iterate
/// then advances along trial 0. Ridge objectives only (F* by Cholesky).
ContractionReport check_contraction(const ScaledObjective& objective, const linalg::Vector& x0,
                                    std::size_t tau, std::size_t steps, std::size_t trials,
                                    std::uint64_t seed);

struct RegimeReport {
  RegimeWindow window;  // at m = tau
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t trials = 0;
  std::vector<StepCheck> steps;
  /// Consecutive steps that started inside the window and passed.
  std::size_t steps_in_regime = 0;
  bool pass = false;
};

/// Takes c = 1 steps from x0 while the gradient norm lies in the window of
/// quad_regime_check at m = k*tau, checking
///   E||grad F(x^{k+1})|| <= 4 (beta/alpha^2) ||grad F(x^k)||^2 + 4 stderr.
/// Passes iff at least one step was in the regime and all such steps passed.
/// An empty window, or x0 outside it, is reported with pass = false.
RegimeReport check_quadratic_regime(const ScaledObjective& objective, const linalg::Vector& x0,
                                    std::size_t tau, std::size_t trials, std::uint64_t seed,
                                    std::size_t max_steps = 10);

/// x* + t u for a random direction u, with t chosen so ||grad F|| = grad_norm.
/// Ridge objectives only.
linalg::Vector point_at_grad_norm(const ScaledObjective& objective, double grad_norm,
                                  Xoshiro256& rng);

/// ||grad||^2 / (2 alpha), an upper bound on F(x) - F*.
double subopt_bound(double grad_norm, double alpha);

/// R built from m samples at x in ordered draws of tau.
linalg::Matrix sample_estimator(const SampleOracle& oracle, const linalg::Vector& x, std::size_t m,
                                std::size_t tau, std::uint64_t seed);

/// Q diag(lambda) Q^T with Q Haar-like orthogonal and spectrum containing
/// alpha and (for d >= 2) 1, the rest uniform in [alpha, 1].
linalg::SymMatrix random_spd(std::size_t d, double alpha, Xoshiro256& rng);

struct SpdCase {
  linalg::SymMatrix h;
  double alpha;
};

/// `count` matrices from random_spd with alpha uniform in [alpha_lo, alpha_hi].
std::vector<SpdCase> spd_grid(std::size_t count, std::size_t d, std::uint64_t seed,
                              double alpha_lo = 0.1, double alpha_hi = 0.9);

/// An oracle whose every sample is the same dense matrix.
class ConstantOracle final : public SampleOracle {
 public:
  ConstantOracle(linalg::SymMatrix h, std::size_t population = 1);
  std::size_t dim() const override { return h_.size(); }
  std::size_t population() const override { return population_; }
  bool hessian_constant() const override { return true; }
  HessianSample hessian_sample(std::size_t i, const linalg::Vector& x) const override;

 private:
  linalg::SymMatrix h_;
  std::size_t population_;
};

/// Dense samples given explicitly, X_i = samples[i].
class ListOracle final : public SampleOracle {
 public:
  explicit ListOracle(std::vector<linalg::SymMatrix> samples);
  std::size_t dim() const override { return samples_.front().size(); }
  std::size_t population() const override { return samples_.size(); }
  bool hessian_constant() const override { return true; }
  HessianSample hessian_sample(std::size_t i, const linalg::Vector& x) const override;
  linalg::SymMatrix mean() const;

 private:
  std::vector<linalg::SymMatrix> samples_;
};

/// CSV in the trace conventions: header line, 17 significant digits.
void write_csv(std::ostream& out, const std::vector<MomentReport>& reports);
void write_csv(std::ostream& out, const std::vector<StepCheck>& steps);

}  // namespace issa::validation
