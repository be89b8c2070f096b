#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "issa/linalg.hpp"

namespace issa {

/// Per-iteration telemetry shared by ISSA and every baseline.
///
/// Row 0 describes the starting point. Row k describes the iterate after the
/// k-th step; c_used is the divisor of that step (x <- x - (1/c) * direction)
/// and quad_regime is the regime detector evaluated at the gradient the step
/// consumed.
struct TraceRow {
  std::size_t iter = 0;
  double fx = 0.0;
  double grad_norm = 0.0;
  std::optional<double> subopt;
  std::optional<double> c_used;
  /// Hessian samples behind the step: |S^k| for ISSA (capped at the
  /// truncation length in the rebuild branch), cumulative samples for LISSA.
  std::size_t estimator_steps = 0;
  std::optional<std::size_t> grad_batch;
  bool quad_regime = false;
  std::optional<double> wall_ms;

  bool operator==(const TraceRow&) const = default;
};

using Trace = std::vector<TraceRow>;

/// Outcome of one optimizer run.
struct RunResult {
  Trace trace;
  linalg::Vector x;
  /// Iterations where the estimator history outgrew the gradient batch
  /// (online variant only).
  std::vector<std::size_t> batch_warnings;
  /// Iteration that completed five consecutive increases of fx, if any.
  std::optional<std::size_t> unstable_at;
};

/// A run aborted on a non-finite objective; the trace up to the failure is kept.
class RunDiverged : public NumericError {
 public:
  RunDiverged(const std::string& what, RunResult partial)
      : NumericError(what), partial_(std::move(partial)) {}
  const RunResult& partial() const { return partial_; }

 private:
  RunResult partial_;
};

}  // namespace issa
