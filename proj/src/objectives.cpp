#include "issa/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace issa {

using linalg::Matrix;
using linalg::SymMatrix;
using linalg::Vector;

namespace {

void validate_design(const Matrix& design, const Vector& y, double lambda, const char* what) {
  if (design.rows() == 0 || design.cols() == 0) {
    throw UsageError(std::string(what) + ": need n >= 1 and d >= 1");
  }
  if (y.size() != design.rows()) {
    throw DimensionError(std::string(what) + ": target count does not match row count");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw UsageError(std::string(what) + ": lambda must be positive");
  }
  if (!linalg::all_finite(design) || !linalg::all_finite(y)) {
    throw UsageError(std::string(what) + ": non-finite data");
  }
}

double max_row_norm_sq(const Matrix& design) {
  double best = 0.0;
  for (std::size_t i = 0; i < design.rows(); ++i) {
    auto row = design.row(i);
    best = std::max(best, linalg::dot(row, row));
  }
  return best;
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

}  // namespace

const char* to_string(Loss loss) { return loss == Loss::ridge ? "ridge" : "logistic"; }

void RidgeProblem::validate() const { validate_design(design, targets, lambda, "RidgeProblem"); }

void LogisticProblem::validate() const {
  validate_design(design, labels, lambda, "LogisticProblem");
  for (double y : labels) {
    if (y != 0.0 && y != 1.0) throw UsageError("LogisticProblem: labels must be 0 or 1");
  }
}

ScaledObjective::ScaledObjective(Loss loss, Matrix design, Vector targets, double lambda,
                                 double scale)
    : loss_(loss),
      design_(std::move(design)),
      targets_(std::move(targets)),
      lambda_(lambda),
      scale_(scale),
      alpha_(lambda / scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw UsageError("ScaledObjective: scale must be positive");
  }
}

namespace {

// Power iteration stalls when the top eigenvalues cluster (large lambda makes
// H close to a multiple of I). The dense eigensolver is exact there.
double hessian_norm_ub(const linalg::SymMatrix& h) {
  try {
    return linalg::spectral_norm_ub(h);
  } catch (const linalg::NonConvergence&) {
    return linalg::symmetric_eigen(h).values.back() * linalg::kSpectralSafetyFactor;
  }
}

}  // namespace

ScaledObjective ScaledObjective::with_scale(Loss loss, Matrix design, Vector targets, double lambda,
                                            double scale, const Vector& x_ref) {
  validate_design(design, targets, lambda, "ScaledObjective");
  ScaledObjective obj(loss, std::move(design), std::move(targets), lambda, scale);
  obj.check_point(x_ref);
  obj.beta_ = hessian_norm_ub(obj.full_hessian(x_ref));
  return obj;
}

ScaledObjective scale_to_unit_hessian(RidgeProblem problem) {
  problem.validate();
  const double s = max_row_norm_sq(problem.design) + problem.lambda;
  const Vector x0(problem.design.cols());
  auto obj = ScaledObjective::with_scale(Loss::ridge, std::move(problem.design),
                                         std::move(problem.targets), problem.lambda, s, x0);
  obj.beta_ = std::min(obj.beta_, 1.0);
  return obj;
}

ScaledObjective scale_to_unit_hessian(LogisticProblem problem) {
  problem.validate();
  const double s = max_row_norm_sq(problem.design) / 4.0 + problem.lambda;
  const Vector x0(problem.design.cols());
  auto obj = ScaledObjective::with_scale(Loss::logistic, std::move(problem.design),
                                         std::move(problem.labels), problem.lambda, s, x0);
  obj.beta_ = std::min(obj.beta_, 1.0);
  return obj;
}

double ridge_lambda_for_alpha(const Matrix& design, double target_alpha) {
  if (!(target_alpha > 0.0 && target_alpha < 1.0)) {
    throw UsageError("ridge_lambda_for_alpha: target must lie in (0, 1)");
  }
  const double r = max_row_norm_sq(design);
  if (r == 0.0) throw UsageError("ridge_lambda_for_alpha: design is all zeros");
  return target_alpha * r / (1.0 - target_alpha);
}

void ScaledObjective::check_point(const Vector& x) const {
  if (x.size() != dim()) {
    throw DimensionError("ScaledObjective: point has dimension " + std::to_string(x.size()) +
                         ", expected " + std::to_string(dim()));
  }
}

Vector ScaledObjective::margins(const Vector& x) const {
  check_point(x);
  return linalg::matvec(design_, x);
}

double ScaledObjective::curvature(double margin) const {
  if (loss_ == Loss::ridge) return 1.0;
  const double p = sigmoid(margin);
  return p * (1.0 - p);
}

double ScaledObjective::value(const Vector& x) const {
  const Vector t = margins(x);
  const std::size_t n = population();
  double data_term = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (loss_ == Loss::ridge) {
      const double r = t[i] - targets_[i];
      data_term += 0.5 * r * r;
    } else {
      data_term += softplus(t[i]) - targets_[i] * t[i];
    }
  }
  return (data_term / static_cast<double>(n) + 0.5 * lambda_ * linalg::dot(x, x)) / scale_;
}

Vector ScaledObjective::gradient(const Vector& x) const {
  std::vector<std::size_t> all(population());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return batch_gradient(x, all);
}

Vector ScaledObjective::batch_gradient(const Vector& x, std::span<const std::size_t> batch) const {
  check_point(x);
  if (batch.empty()) throw UsageError("batch_gradient: empty batch");
  std::vector<std::size_t> order(batch.begin(), batch.end());
  std::sort(order.begin(), order.end());

  Vector g(dim());
  for (std::size_t i : order) {
    if (i >= population()) throw UsageError("batch_gradient: index out of range");
    auto z = design_.row(i);
    const double t = linalg::dot(z, x.span());
    const double residual = loss_ == Loss::ridge ? t - targets_[i] : sigmoid(t) - targets_[i];
    for (std::size_t j = 0; j < z.size(); ++j) g[j] += residual * z[j];
  }
  const double inv_b = 1.0 / static_cast<double>(order.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = (g[j] * inv_b + lambda_ * x[j]) / scale_;
  return g;
}

HessianSample ScaledObjective::hessian_sample(std::size_t i, const Vector& x) const {
  if (i >= population()) {
    throw UsageError("hessian_sample: index " + std::to_string(i) + " out of range");
  }
  check_point(x);
  auto row = design_.row(i);
  double weight = 1.0;
  if (loss_ == Loss::logistic) weight = curvature(linalg::dot(row, x.span()));
  return HessianSample::rank_one(lambda_ / scale_, weight / scale_,
                                 Vector(std::vector<double>(row.begin(), row.end())));
}

SymMatrix ScaledObjective::full_hessian(const Vector& x) const {
  const Vector t = margins(x);
  const std::size_t d = dim();
  const std::size_t n = population();
  Matrix h(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = curvature(t[i]);
    auto z = design_.row(i);
    for (std::size_t a = 0; a < d; ++a) {
      const double wza = w * z[a];
      if (wza == 0.0) continue;
      auto h_row = h.row(a);
      for (std::size_t b = a; b < d; ++b) h_row[b] += wza * z[b];
    }
  }
  const double inv_ns = 1.0 / (static_cast<double>(n) * scale_);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      h(a, b) *= inv_ns;
      h(b, a) = h(a, b);
    }
    h(a, a) += lambda_ / scale_;
  }
  return SymMatrix(std::move(h));
}

Vector ridge_minimizer(const ScaledObjective& objective) {
  if (objective.loss() != Loss::ridge) throw UsageError("ridge_minimizer: objective is not ridge");
  const std::size_t n = objective.population();
  Vector b = linalg::matvec_transposed(objective.design(), objective.targets());
  b *= 1.0 / (static_cast<double>(n) * objective.scale());
  return linalg::solve_spd(objective.full_hessian(Vector(objective.dim())), b);
}

}  // namespace issa
