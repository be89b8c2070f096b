#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "issa/hessian_sample.hpp"
#include "issa/linalg.hpp"
#include "issa/sampling.hpp"

namespace issa {

enum class EstimatorMode { practical, theoretical };

inline constexpr std::size_t kNoTruncation = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kDefaultTruncateCap = 100;
/// Any |R(i,j)| above this aborts the update.
inline constexpr double kDivergenceThreshold = 1e12;

/// Raised when the estimator grows past kDivergenceThreshold, which happens
/// when samples are not bounded by the identity.
class EstimatorDivergence : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Running von Neumann approximation R of the inverse Hessian, together with
/// the ordered sample history it was built from.
///
/// Each sample X_j folds in as R <- I + (I - X_j) R. Starting from R = I, m
/// independent samples give E[R] = sum_{j=0}^{m} (I - H)^j.
///
/// The history is a sequence, not a set: an index drawn again in a later
/// round is appended again.
class EstimatorState {
 public:
  EstimatorState(std::size_t dim, EstimatorMode mode,
                 std::size_t truncate_cap = kDefaultTruncateCap);

  const linalg::Matrix& r() const { return r_; }
  std::span<const std::size_t> history() const { return history_; }
  /// |S^k|
  std::size_t steps() const { return history_.size(); }
  /// Number of samples folded into the current R. Equals steps() except in
  /// theoretical mode once the history exceeds the truncation cap.
  std::size_t folded() const { return folded_; }
  EstimatorMode mode() const { return mode_; }
  std::size_t truncate_cap() const { return truncate_cap_; }

  /// Constant-Hessian branch: fold the draw into R in draw order.
  void practical_update(const Draw& draw, const SampleOracle& oracle);

  /// Rebuild branch, step 1: S^k = S^{k-1} followed by the draw.
  void extend_history(const Draw& draw);
  /// Rebuild branch, step 2: R from I over the last min(|S^k|, cap) history
  /// entries, with every sample evaluated at x.
  void theoretical_rebuild(const linalg::Vector& x, const SampleOracle& oracle);

 private:
  linalg::Matrix r_;
  std::vector<std::size_t> history_;
  std::size_t folded_ = 0;
  EstimatorMode mode_;
  std::size_t truncate_cap_;
};

/// I folded over `indices` in order; the replay of a practical history.
linalg::Matrix fold_samples(std::span<const std::size_t> indices, const linalg::Vector& x,
                            const SampleOracle& oracle);

/// sum_{j=0}^{m} (I - H)^j by Horner folding: the expectation of R after m
/// independent samples with mean H.
linalg::SymMatrix expected_estimator(const linalg::SymMatrix& h, std::size_t m);

/// (1 - alpha)^m / alpha, a bound on ||expected_estimator(H, m) - H^{-1}||_2
/// when alpha I <= H <= I.
double approx_error_bound(double alpha, std::size_t m);

}  // namespace issa
