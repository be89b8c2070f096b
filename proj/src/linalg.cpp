#include "issa/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace issa::linalg {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

Vector& Vector::operator+=(const Vector& other) {
  require_same_size(size(), other.size(), "Vector::operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& other) {
  require_same_size(size(), other.size(), "Vector::operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Vector& Vector::operator*=(double scale) {
  for (double& v : data_) v *= scale;
  return *this;
}

Vector operator+(Vector a, const Vector& b) { return a += b; }
Vector operator-(Vector a, const Vector& b) { return a -= b; }
Vector operator*(double scale, Vector v) { return v *= scale; }

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "dot");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double dot(const Vector& a, const Vector& b) { return dot(a.span(), b.span()); }

double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

void axpy(double a, const Vector& x, Vector& y) {
  require_same_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

bool all_finite(const Vector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t d) {
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const Vector& diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "Matrix::operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "Matrix::operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double scale) {
  for (double& v : data_) v *= scale;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double scale, Matrix m) { return m *= scale; }

Vector matvec(const Matrix& m, const Vector& v) {
  require_same_size(m.cols(), v.size(), "matvec");
  Vector out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot(m.row(i), v.span());
  return out;
}

Vector matvec_transposed(const Matrix& m, const Vector& v) {
  require_same_size(m.rows(), v.size(), "matvec_transposed");
  Vector out(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    auto row = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += vi * row[j];
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require_same_size(a.cols(), b.rows(), "matmul");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  return out;
}

double max_abs(const Matrix& m) {
  double best = 0.0;
  const std::size_t count = m.rows() * m.cols();
  for (std::size_t i = 0; i < count; ++i) best = std::max(best, std::abs(m.data()[i]));
  return best;
}

double norm_inf(const Matrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (double v : m.row(i)) sum += std::abs(v);
    best = std::max(best, sum);
  }
  return best;
}

double norm_frobenius(const Matrix& m) {
  double sum = 0.0;
  const std::size_t count = m.rows() * m.cols();
  for (std::size_t i = 0; i < count; ++i) sum += m.data()[i] * m.data()[i];
  return std::sqrt(sum);
}

bool all_finite(const Matrix& m) {
  const std::size_t count = m.rows() * m.cols();
  return std::all_of(m.data(), m.data() + count, [](double x) { return std::isfinite(x); });
}

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  if (!m_.is_square()) throw DimensionError("SymMatrix: matrix is not square");
  const double tol = 1e-12 * std::max(1.0, norm_inf(m_));
  for (std::size_t i = 0; i < m_.rows(); ++i) {
    for (std::size_t j = i + 1; j < m_.cols(); ++j) {
      if (std::abs(m_(i, j) - m_(j, i)) > tol) {
        throw UsageError("SymMatrix: matrix is not symmetric at (" + std::to_string(i) + ", " +
                         std::to_string(j) + ")");
      }
    }
  }
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  if (!m.is_square()) throw DimensionError("SymMatrix: matrix is not square");
  Matrix s(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
  return SymMatrix(std::move(s));
}

Vector matvec(const SymMatrix& m, const Vector& v) { return matvec(m.matrix(), v); }

double power_iteration(const SymMatrix& m, const PowerIterationOptions& options) {
  const std::size_t d = m.size();
  if (d == 0) throw DimensionError("power_iteration: empty matrix");

  Vector v(d, 1.0 / std::sqrt(static_cast<double>(d)));
  double rayleigh = 0.0;
  for (int iter = 0; iter < options.max_iters; ++iter) {
    Vector w = matvec(m, v);
    const double next = dot(v, w);
    const double w_norm = norm2(w);
    if (w_norm == 0.0) return 0.0;  // v is in the null space; m is zero along v
    if (!std::isfinite(next)) {
      throw NonConvergence("power_iteration: non-finite iterate", rayleigh);
    }
    if (iter > 0 && std::abs(next - rayleigh) <= options.tol * std::abs(next)) return next;
    rayleigh = next;
    w *= 1.0 / w_norm;
    v = std::move(w);
  }
  throw NonConvergence("power_iteration: no convergence after " +
                           std::to_string(options.max_iters) + " iterations",
                       rayleigh);
}

double spectral_norm_ub(const SymMatrix& m, const PowerIterationOptions& options) {
  return power_iteration(m, options) * kSpectralSafetyFactor;
}

double min_eig_lb(const SymMatrix& m, double lambda_max_ub, const PowerIterationOptions& options) {
  Matrix shifted = -1.0 * m.matrix();
  for (std::size_t i = 0; i < m.size(); ++i) shifted(i, i) += lambda_max_ub;
  const double top = power_iteration(SymMatrix(std::move(shifted)), options);
  return (lambda_max_ub - top) / kSpectralSafetyFactor;
}

double min_eig_lb(const SymMatrix& m, const PowerIterationOptions& options) {
  return min_eig_lb(m, spectral_norm_ub(m, options), options);
}

SymmetricEigen symmetric_eigen(const SymMatrix& sym) {
  Matrix a = sym.matrix();
  const std::size_t d = a.rows();
  Matrix v = Matrix::identity(d);
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off += a(p, q) * a(p, q);
    if (off <= 1e-30 * std::max(1.0, norm_frobenius(a) * norm_frobenius(a))) break;

    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(d);
  for (std::size_t i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymmetricEigen result{std::vector<double>(d), Matrix(d, d)};
  for (std::size_t col = 0; col < d; ++col) {
    result.values[col] = a(order[col], order[col]);
    for (std::size_t k = 0; k < d; ++k) result.vectors(k, col) = v(k, order[col]);
  }
  return result;
}

std::vector<double> symmetric_eigenvalues(const SymMatrix& sym) { return symmetric_eigen(sym).values; }

double spectral_norm(const Matrix& m) {
  const Matrix gram = matmul(transpose(m), m);
  const auto eig = symmetric_eigenvalues(SymMatrix::symmetrized(gram));
  return eig.empty() ? 0.0 : std::sqrt(std::max(0.0, eig.back()));
}

Matrix cholesky(const SymMatrix& sym) {
  const Matrix& m = sym.matrix();
  const std::size_t d = m.rows();
  Matrix l(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    double diag = m(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) {
      throw NumericError("cholesky: non-positive pivot at column " + std::to_string(j) +
                         " (matrix is not positive definite)");
    }
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < d; ++i) {
      double sum = m(i, j);
      for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
      l(i, j) = sum / l(j, j);
    }
  }
  return l;
}

namespace {

Vector cholesky_solve(const Matrix& l, const Vector& b) {
  const std::size_t d = l.rows();
  Vector y(d);
  for (std::size_t i = 0; i < d; ++i) {
    double sum = b[i];
    for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * y[k];
    y[i] = sum / l(i, i);
  }
  Vector x(d);
  for (std::size_t i = d; i-- > 0;) {
    double sum = y[i];
    for (std::size_t k = i + 1; k < d; ++k) sum -= l(k, i) * x[k];
    x[i] = sum / l(i, i);
  }
  return x;
}

}  // namespace

Vector solve_spd(const SymMatrix& m, const Vector& b) {
  require_same_size(m.size(), b.size(), "solve_spd");
  return cholesky_solve(cholesky(m), b);
}

Matrix inverse_spd(const SymMatrix& m) {
  const std::size_t d = m.size();
  const Matrix l = cholesky(m);
  Matrix inv(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    Vector e(d);
    e[j] = 1.0;
    const Vector col = cholesky_solve(l, e);
    for (std::size_t i = 0; i < d; ++i) inv(i, j) = col[i];
  }
  return inv;
}

}  // namespace issa::linalg
