#pragma once

#include <cstddef>
#include <span>

#include "issa/hessian_sample.hpp"
#include "issa/linalg.hpp"

namespace issa {

enum class Loss { ridge, logistic };

const char* to_string(Loss loss);

/// (1/2n) sum (z_i^T x - y_i)^2 + (lambda/2) ||x||^2
struct RidgeProblem {
  linalg::Matrix design;  // n x d, rows are z_i
  linalg::Vector targets;
  double lambda = 0.0;

  void validate() const;
};

/// (1/n) sum [log(1 + exp(z_i^T x)) - y_i z_i^T x] + (lambda/2) ||x||^2, y_i in {0, 1}
struct LogisticProblem {
  linalg::Matrix design;
  linalg::Vector labels;
  double lambda = 0.0;

  void validate() const;
};

/// An ERM objective divided by a scale s so that every Hessian sample, and
/// hence the Hessian, is bounded by the identity.
///
/// s bounds each per-datapoint sample, not only their mean:
///   ridge:    s = max_i ||z_i||^2 + lambda
///   logistic: s = max_i ||z_i||^2 / 4 + lambda
/// alpha = lambda / s is a uniform strong-convexity constant. beta is the
/// spectral upper bound of the Hessian at the reference point, clamped to 1.
class ScaledObjective final : public SampleOracle {
 public:
  /// Divides by an explicit scale without clamping beta. Used to build
  /// deliberately unscaled problems; prefer scale_to_unit_hessian.
  static ScaledObjective with_scale(Loss loss, linalg::Matrix design, linalg::Vector targets,
                                    double lambda, double scale, const linalg::Vector& x_ref);

  Loss loss() const { return loss_; }
  std::size_t dim() const override { return design_.cols(); }
  std::size_t population() const override { return design_.rows(); }
  bool hessian_constant() const override { return loss_ == Loss::ridge; }

  const linalg::Matrix& design() const { return design_; }
  const linalg::Vector& targets() const { return targets_; }
  double lambda() const { return lambda_; }
  double scale() const { return scale_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  double value(const linalg::Vector& x) const;
  linalg::Vector gradient(const linalg::Vector& x) const;
  /// Mean of the per-datapoint gradients over the batch; unbiased for gradient().
  /// Accumulates in ascending index order, so the full batch reproduces
  /// gradient() exactly.
  linalg::Vector batch_gradient(const linalg::Vector& x, std::span<const std::size_t> batch) const;
  HessianSample hessian_sample(std::size_t i, const linalg::Vector& x) const override;
  linalg::SymMatrix full_hessian(const linalg::Vector& x) const;

 private:
  friend ScaledObjective scale_to_unit_hessian(RidgeProblem problem);
  friend ScaledObjective scale_to_unit_hessian(LogisticProblem problem);

  ScaledObjective(Loss loss, linalg::Matrix design, linalg::Vector targets, double lambda,
                  double scale);

  double curvature(double margin) const;
  linalg::Vector margins(const linalg::Vector& x) const;
  void check_point(const linalg::Vector& x) const;

  Loss loss_;
  linalg::Matrix design_;
  linalg::Vector targets_;
  double lambda_;
  double scale_;
  double alpha_;
  double beta_ = 1.0;
};

/// Beta is estimated at x0 = 0.
ScaledObjective scale_to_unit_hessian(RidgeProblem problem);
ScaledObjective scale_to_unit_hessian(LogisticProblem problem);

/// Regularization that makes the scaled ridge objective have alpha = target,
/// i.e. lambda / (max_i ||z_i||^2 + lambda) = target. Requires 0 < target < 1.
double ridge_lambda_for_alpha(const linalg::Matrix& design, double target_alpha);

/// Exact minimizer of a scaled ridge objective, by Cholesky.
linalg::Vector ridge_minimizer(const ScaledObjective& objective);

}  // namespace issa
