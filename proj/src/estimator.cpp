#include "issa/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace issa {

using linalg::Matrix;
using linalg::SymMatrix;
using linalg::Vector;

namespace {

void guard(const Matrix& r) {
  const double worst = linalg::max_abs(r);
  if (!(worst <= kDivergenceThreshold)) {
    throw EstimatorDivergence("estimator diverged: max |R(i,j)| = " + std::to_string(worst) +
                              " (are the Hessian samples bounded by I?)");
  }
}

void fold_one(Matrix& r, std::size_t index, const Vector& x, const SampleOracle& oracle) {
  oracle.hessian_sample(index, x).fold_into(r);
  guard(r);
}

}  // namespace

EstimatorState::EstimatorState(std::size_t dim, EstimatorMode mode, std::size_t truncate_cap)
    : r_(Matrix::identity(dim)), mode_(mode), truncate_cap_(truncate_cap) {
  if (dim == 0) throw UsageError("EstimatorState: dimension must be at least 1");
}

void EstimatorState::practical_update(const Draw& draw, const SampleOracle& oracle) {
  if (mode_ != EstimatorMode::practical) {
    throw UsageError("practical_update: estimator is in theoretical mode");
  }
  if (!oracle.hessian_constant()) {
    throw UsageError("practical_update: Hessian samples depend on x; use the rebuild branch");
  }
  if (oracle.dim() != r_.rows()) throw DimensionError("practical_update: oracle dimension mismatch");

  // Samples are x-independent, so any point serves.
  const Vector x(oracle.dim());
  for (std::size_t j : draw) {
    fold_one(r_, j, x, oracle);
    history_.push_back(j);
    ++folded_;
  }
}

void EstimatorState::extend_history(const Draw& draw) {
  if (mode_ != EstimatorMode::theoretical) {
    throw UsageError("extend_history: estimator is in practical mode");
  }
  history_.insert(history_.end(), draw.begin(), draw.end());
}

void EstimatorState::theoretical_rebuild(const Vector& x, const SampleOracle& oracle) {
  if (mode_ != EstimatorMode::theoretical) {
    throw UsageError("theoretical_rebuild: estimator is in practical mode");
  }
  const std::size_t count = std::min(history_.size(), truncate_cap_);
  r_ = fold_samples(std::span(history_).last(count), x, oracle);
  folded_ = count;
}

Matrix fold_samples(std::span<const std::size_t> indices, const Vector& x,
                    const SampleOracle& oracle) {
  Matrix r = Matrix::identity(oracle.dim());
  for (std::size_t j : indices) fold_one(r, j, x, oracle);
  return r;
}

SymMatrix expected_estimator(const SymMatrix& h, std::size_t m) {
  const std::size_t d = h.size();
  const Matrix complement = Matrix::identity(d) - h.matrix();
  Matrix e = Matrix::identity(d);
  for (std::size_t j = 0; j < m; ++j) {
    e = linalg::matmul(complement, e);
    for (std::size_t i = 0; i < d; ++i) e(i, i) += 1.0;
  }
  // Polynomials in a symmetric H are symmetric up to rounding.
  return SymMatrix::symmetrized(e);
}

double approx_error_bound(double alpha, std::size_t m) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError("approx_error_bound: alpha must lie in (0, 1]");
  return std::pow(1.0 - alpha, static_cast<double>(m)) / alpha;
}

}  // namespace issa
