#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "issa/errors.hpp"

/// Small dense linear algebra used throughout the library.
///
/// Problems are expected in the n >> d regime with d at most a few hundred,
/// so everything is stored densely in row-major order.
namespace issa::linalg {

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t size, double value = 0.0) : data_(size, value) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  Vector& operator+=(const Vector& other);
  Vector& operator-=(const Vector& other);
  Vector& operator*=(double scale);

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> data_;
};

Vector operator+(Vector a, const Vector& b);
Vector operator-(Vector a, const Vector& b);
Vector operator*(double scale, Vector v);

double dot(std::span<const double> a, std::span<const double> b);
double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);
/// y += a * x
void axpy(double a, const Vector& x, Vector& y);
bool all_finite(const Vector& v);

/// Row-major dense matrix. Square matrices are the common case, but the
/// design matrix of a dataset is rectangular, so the shape is general.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t d);
  static Matrix diagonal(const Vector& diag);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double scale);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double scale, Matrix m);

Vector matvec(const Matrix& m, const Vector& v);
/// m^T v
Vector matvec_transposed(const Matrix& m, const Vector& v);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
double max_abs(const Matrix& m);
/// Maximum absolute row sum.
double norm_inf(const Matrix& m);
double norm_frobenius(const Matrix& m);
bool all_finite(const Matrix& m);

/// Square matrix checked for symmetry on construction:
/// |M(i,j) - M(j,i)| <= 1e-12 * max(1, ||M||_inf).
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix m);

  /// Averages m with its transpose instead of rejecting small asymmetries.
  static SymMatrix symmetrized(const Matrix& m);

  std::size_t size() const { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }

  bool operator==(const SymMatrix&) const = default;

 private:
  Matrix m_;
};

Vector matvec(const SymMatrix& m, const Vector& v);

inline constexpr double kSpectralSafetyFactor = 1.01;

struct PowerIterationOptions {
  int max_iters = 1000;
  double tol = 1e-10;
};

/// Power iteration gave up; carries the last Rayleigh quotient.
class NonConvergence : public NumericError {
 public:
  NonConvergence(const std::string& what, double last_estimate)
      : NumericError(what), last_estimate_(last_estimate) {}
  double last_estimate() const { return last_estimate_; }

 private:
  double last_estimate_;
};

/// Rayleigh quotient of the eigenvalue of largest magnitude, found by power
/// iteration from the normalized all-ones vector. Stops once the quotient
/// changes by at most tol relative.
double power_iteration(const SymMatrix& m, const PowerIterationOptions& options = {});

/// Upper bound on lambda_max of a positive semidefinite matrix: the power
/// iteration estimate times kSpectralSafetyFactor.
double spectral_norm_ub(const SymMatrix& m, const PowerIterationOptions& options = {});

/// Lower bound on lambda_min, from power iteration on (lambda_max_ub * I - m),
/// divided by kSpectralSafetyFactor. lambda_max_ub must bound lambda_max(m).
double min_eig_lb(const SymMatrix& m, double lambda_max_ub,
                  const PowerIterationOptions& options = {});
double min_eig_lb(const SymMatrix& m, const PowerIterationOptions& options = {});

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column i belongs to values[i]
};

/// Full eigendecomposition by cyclic Jacobi rotations.
SymmetricEigen symmetric_eigen(const SymMatrix& m);
/// All eigenvalues, ascending.
std::vector<double> symmetric_eigenvalues(const SymMatrix& m);

/// ||m||_2 = sqrt(lambda_max(m^T m)) for a general square or rectangular m.
double spectral_norm(const Matrix& m);

/// Lower-triangular Cholesky factor L with m = L L^T.
/// Throws NumericError on a non-positive pivot.
Matrix cholesky(const SymMatrix& m);
Vector solve_spd(const SymMatrix& m, const Vector& b);
Matrix inverse_spd(const SymMatrix& m);

}  // namespace issa::linalg
