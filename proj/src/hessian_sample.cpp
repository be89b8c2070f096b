#include "issa/hessian_sample.hpp"

#include <utility>

namespace issa {

using linalg::Matrix;
using linalg::SymMatrix;
using linalg::Vector;

HessianSample HessianSample::rank_one(double shift, double weight, Vector direction) {
  HessianSample s;
  s.shift_ = shift;
  s.weight_ = weight;
  s.direction_ = std::move(direction);
  return s;
}

HessianSample HessianSample::dense(SymMatrix matrix) {
  HessianSample s;
  s.dense_ = std::move(matrix);
  return s;
}

std::size_t HessianSample::dim() const { return dense_ ? dense_->size() : direction_.size(); }

SymMatrix HessianSample::to_dense() const {
  if (dense_) return *dense_;
  const std::size_t d = direction_.size();
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) m(i, j) = weight_ * direction_[i] * direction_[j];
    m(i, i) += shift_;
  }
  return SymMatrix(std::move(m));
}

void HessianSample::fold_into(Matrix& r) const {
  const std::size_t d = dim();
  if (r.rows() != d || r.cols() != d) throw DimensionError("HessianSample::fold_into: shape mismatch");

  if (dense_) {
    Matrix xr = linalg::matmul(dense_->matrix(), r);
    r -= xr;
  } else {
    // (I - shift I - weight z z^T) r = (1 - shift) r - weight z (z^T r)
    Vector zr(d);
    for (std::size_t k = 0; k < d; ++k) {
      const double zk = direction_[k];
      if (zk == 0.0) continue;
      auto row = r.row(k);
      for (std::size_t j = 0; j < d; ++j) zr[j] += zk * row[j];
    }
    const double keep = 1.0 - shift_;
    for (std::size_t i = 0; i < d; ++i) {
      const double wz = weight_ * direction_[i];
      auto row = r.row(i);
      for (std::size_t j = 0; j < d; ++j) row[j] = keep * row[j] - wz * zr[j];
    }
  }
  for (std::size_t i = 0; i < d; ++i) r(i, i) += 1.0;
}

Vector HessianSample::complement_apply(const Vector& v) const {
  if (dense_) return v - linalg::matvec(*dense_, v);
  Vector out = (1.0 - shift_) * v;
  linalg::axpy(-weight_ * linalg::dot(direction_, v), direction_, out);
  return out;
}

}  // namespace issa
