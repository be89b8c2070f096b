#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "issa/objectives.hpp"
#include "issa/trace.hpp"

namespace issa::detail {

/// Appends TraceRows for a run and owns its stopwatch.
class TraceRecorder {
 public:
  TraceRecorder(const ScaledObjective& objective, std::optional<double> f_star, bool record_time)
      : objective_(objective),
        f_star_(f_star),
        record_time_(record_time),
        start_(std::chrono::steady_clock::now()) {}

  /// Completes `row` with F, ||grad F||, subopt and wall time at x and appends
  /// it. Throws RunDiverged on a non-finite value.
  void record(TraceRow row, const linalg::Vector& x, const linalg::Vector& gradient,
              RunResult& result) {
    row.fx = objective_.value(x);
    row.grad_norm = linalg::norm2(gradient);
    if (f_star_) row.subopt = row.fx - *f_star_;
    if (record_time_) {
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              start_)
                        .count();
    }
    const bool finite = std::isfinite(row.fx) && std::isfinite(row.grad_norm);
    track_increase(row.fx, row.iter, result);
    result.trace.push_back(row);
    if (!finite) {
      result.x = x;
      throw RunDiverged("non-finite objective at iteration " + std::to_string(row.iter),
                        std::move(result));
    }
  }

 private:
  const ScaledObjective& objective_;
  std::optional<double> f_star_;
  bool record_time_;
  std::chrono::steady_clock::time_point start_;
  std::optional<double> last_fx_;
  int increases_ = 0;

  // Five consecutive increases of fx mark the run unstable.
  void track_increase(double fx, std::size_t iter, RunResult& result) {
    increases_ = (last_fx_ && fx > *last_fx_) ? increases_ + 1 : 0;
    last_fx_ = fx;
    if (increases_ >= 5 && !result.unstable_at) result.unstable_at = iter;
  }
};

}  // namespace issa::detail
