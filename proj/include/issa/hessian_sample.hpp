#pragma once

#include <cstddef>
#include <optional>

#include "issa/linalg.hpp"

namespace issa {

/// One unbiased Hessian sample X_i(x).
///
/// ERM samples are `shift * I + weight * z z^T` and are stored in that form so
/// the estimator update costs O(d^2) rather than O(d^3). Arbitrary samples
/// (tests, constructed problems) are stored densely.
class HessianSample {
 public:
  static HessianSample rank_one(double shift, double weight, linalg::Vector direction);
  static HessianSample dense(linalg::SymMatrix matrix);

  std::size_t dim() const;
  linalg::SymMatrix to_dense() const;

  /// r <- I + (I - X) r
  void fold_into(linalg::Matrix& r) const;
  /// (I - X) v
  linalg::Vector complement_apply(const linalg::Vector& v) const;

 private:
  HessianSample() = default;

  double shift_ = 0.0;
  double weight_ = 0.0;
  linalg::Vector direction_;
  std::optional<linalg::SymMatrix> dense_;
};

/// Source of Hessian samples X_i(x), i in [0, population()).
class SampleOracle {
 public:
  virtual ~SampleOracle() = default;

  virtual std::size_t dim() const = 0;
  virtual std::size_t population() const = 0;
  /// True when X_i does not depend on x, so past samples stay valid.
  virtual bool hessian_constant() const = 0;
  virtual HessianSample hessian_sample(std::size_t i, const linalg::Vector& x) const = 0;
};

}  // namespace issa
