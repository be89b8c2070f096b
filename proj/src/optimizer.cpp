#include "issa/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "issa/sampling.hpp"
#include "trace_recorder.hpp"

namespace issa {

using linalg::Matrix;
using linalg::Vector;

const char* to_string(Variant variant) {
  switch (variant) {
    case Variant::practical: return "practical";
    case Variant::theoretical: return "theoretical";
    case Variant::online: return "online";
  }
  return "?";
}

const char* to_string(StepMode mode) { return mode == StepMode::theorem1 ? "theorem1" : "fixed"; }

void RunConfig::validate() const {
  if (tau < 1) throw UsageError("RunConfig: tau must be at least 1");
  if (!(c_fixed > 0.0)) throw UsageError("RunConfig: c must be positive");
  if (!(grad_tol >= 0.0)) throw UsageError("RunConfig: grad_tol must be non-negative");
  if (variant == Variant::online) {
    if (online.grad_batch0 < 1) throw UsageError("RunConfig: gradient batch must be at least 1");
    if (!(online.growth >= 1.0)) throw UsageError("RunConfig: batch growth must be >= 1");
    if (online.grad_seed == seed) {
      throw UsageError(
          "RunConfig: the gradient sampler must not share its seed with the Hessian sampler");
    }
  }
}

namespace {

void check_constants(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha <= beta && beta <= 1.0)) {
    throw UsageError("need 0 < alpha <= beta <= 1 (alpha=" + std::to_string(alpha) +
                     ", beta=" + std::to_string(beta) + ")");
  }
}

// (1 - alpha)^m with m possibly infinite
double decay(double alpha, double m) { return std::pow(1.0 - alpha, m); }

}  // namespace

double step_size_theorem1(double alpha, double beta, double m) {
  check_constants(alpha, beta);
  const double q = decay(alpha, m);
  const double denominator = (1.0 - alpha) * (1.0 - alpha) - q * q;
  if (!(denominator > 0.0)) {
    throw NumericError("step_size_theorem1: non-positive denominator at m=" + std::to_string(m));
  }
  return (beta * (2.0 - alpha) * (2.0 - alpha) + beta * (2.0 - alpha) * q) / denominator;
}

double step_size_limit(double alpha, double beta) {
  check_constants(alpha, beta);
  if (alpha >= 1.0) throw NumericError("step_size_limit: undefined for alpha = 1");
  return beta * (2.0 - alpha) * (2.0 - alpha) / ((1.0 - alpha) * (1.0 - alpha));
}

double step_size_or_limit(double alpha, double beta, double m) {
  try {
    return step_size_theorem1(alpha, beta, m);
  } catch (const NumericError&) {
    return step_size_limit(alpha, beta);
  }
}

double compute_mu(double alpha, double beta, double m) {
  check_constants(alpha, beta);
  const double one_minus = 1.0 - alpha;
  const double two_minus = 2.0 - alpha;
  return std::pow(one_minus, 4) * alpha /
         (beta * two_minus * two_minus * (two_minus + alpha * alpha * decay(alpha, m)));
}

RegimeWindow quad_regime_window(double alpha, double beta, double m) {
  check_constants(alpha, beta);
  RegimeWindow w;
  w.lower = beta * decay(alpha, m) / 2.0 + alpha * beta * (beta - alpha) / 4.0;
  w.upper = alpha * alpha / (8.0 * beta);
  return w;
}

bool quad_regime_check(double grad_norm, double alpha, double beta, double m) {
  return quad_regime_window(alpha, beta, m).contains(grad_norm);
}

Vector issa_step(const Vector& x, const Matrix& r, const Vector& gradient, double c) {
  if (!(c > 0.0)) throw UsageError("issa_step: c must be positive");
  Vector next = x;
  linalg::axpy(-1.0 / c, linalg::matvec(r, gradient), next);
  return next;
}

Vector issa_step(const ScaledObjective& objective, const Vector& x, const Matrix& r, double c) {
  return issa_step(x, r, objective.gradient(x), c);
}

namespace {

struct Loop {
  const RunConfig& config;
  const ScaledObjective& objective;
  EstimatorState estimator;
  OrderedSampler sampler;

  Loop(const RunConfig& cfg, const ScaledObjective& obj, EstimatorMode mode)
      : config(cfg),
        objective(obj),
        estimator(obj.dim(), mode, cfg.truncate_cap),
        sampler(SamplingSpec{obj.population(), cfg.tau, cfg.seed}) {}

  // Draws tau indices and brings R^k up to date at x.
  void refresh_estimator(const Vector& x) {
    const Draw draw = sampler.draw();
    if (estimator.mode() == EstimatorMode::practical) {
      estimator.practical_update(draw, objective);
    } else {
      estimator.extend_history(draw);
      estimator.theoretical_rebuild(x, objective);
    }
  }

  double step_divisor() const {
    if (config.step_mode == StepMode::fixed) return config.c_fixed;
    return step_size_or_limit(objective.alpha(), objective.beta(),
                              static_cast<double>(estimator.folded()));
  }
};

void check_start(const RunConfig& config, const ScaledObjective& objective, const Vector& x0) {
  config.validate();
  if (x0.size() != objective.dim()) throw DimensionError("run: x0 has the wrong dimension");
  if (config.tau > objective.population()) throw UsageError("run: tau exceeds the dataset size");
  if (config.step_mode == StepMode::theorem1 && !(objective.alpha() < 1.0)) {
    throw UsageError("run: theorem1 step sizes need alpha < 1");
  }
}

[[noreturn]] void rethrow_diverged(const EstimatorDivergence& e, RunResult& result, const Vector& x) {
  result.x = x;
  throw RunDiverged(e.what(), std::move(result));
}

}  // namespace

RunResult run(const RunConfig& config, const ScaledObjective& objective, const Vector& x0,
              std::optional<double> f_star) {
  if (config.variant == Variant::online) return online_run(config, objective, x0, f_star);
  check_start(config, objective, x0);

  EstimatorMode mode = EstimatorMode::theoretical;
  if (config.variant == Variant::practical) {
    if (!objective.hessian_constant()) {
      throw UsageError("run: the practical variant needs x-independent Hessian samples");
    }
    mode = EstimatorMode::practical;
  }

  Loop loop(config, objective, mode);
  detail::TraceRecorder recorder(objective, f_star, config.record_time);
  RunResult result;
  Vector x = x0;
  Vector g = objective.gradient(x);
  recorder.record(TraceRow{}, x, g, result);

  try {
    for (std::size_t k = 1; k <= config.max_iters; ++k) {
      const double grad_norm = result.trace.back().grad_norm;
      if (grad_norm <= config.grad_tol) break;

      loop.refresh_estimator(x);
      const double m = static_cast<double>(loop.estimator.folded());
      const double c = loop.step_divisor();

      TraceRow row;
      row.iter = k;
      row.c_used = c;
      row.estimator_steps = loop.estimator.folded();
      row.quad_regime = quad_regime_check(grad_norm, objective.alpha(), objective.beta(), m);

      x = issa_step(x, loop.estimator.r(), g, c);
      g = objective.gradient(x);
      recorder.record(row, x, g, result);
    }
  } catch (const EstimatorDivergence& e) {
    rethrow_diverged(e, result, x);
  }
  result.x = std::move(x);
  return result;
}

RunResult online_run(const RunConfig& config, const ScaledObjective& objective, const Vector& x0,
                     std::optional<double> f_star) {
  RunConfig online = config;
  online.variant = Variant::online;
  check_start(online, objective, x0);

  const std::size_t n = objective.population();
  const EstimatorMode mode =
      objective.hessian_constant() ? EstimatorMode::practical : EstimatorMode::theoretical;
  Loop loop(online, objective, mode);
  OrderedSampler batch_sampler(SamplingSpec{n, 1, online.online.grad_seed});
  detail::TraceRecorder recorder(objective, f_star, online.record_time);

  RunResult result;
  Vector x = x0;
  Vector g = objective.gradient(x);
  recorder.record(TraceRow{}, x, g, result);
  std::size_t batch = std::min(n, online.online.grad_batch0);

  try {
    for (std::size_t k = 1; k <= online.max_iters; ++k) {
      const double grad_norm = result.trace.back().grad_norm;
      if (grad_norm <= online.grad_tol) break;

      loop.refresh_estimator(x);
      const double m = static_cast<double>(loop.estimator.folded());
      const double c = loop.step_divisor();

      // The full batch is the full gradient; skipping the draw keeps it bit-identical.
      Vector g_batch = batch == n ? g : objective.batch_gradient(x, batch_sampler.draw(batch).indices());

      TraceRow row;
      row.iter = k;
      row.c_used = c;
      row.estimator_steps = loop.estimator.folded();
      row.grad_batch = batch;
      row.quad_regime = quad_regime_check(grad_norm, objective.alpha(), objective.beta(), m);
      if (loop.estimator.steps() > batch) result.batch_warnings.push_back(k);

      x = issa_step(x, loop.estimator.r(), g_batch, c);
      g = objective.gradient(x);
      recorder.record(row, x, g, result);

      const double grown = std::ceil(online.online.growth * static_cast<double>(batch));
      batch = grown >= static_cast<double>(n) ? n : static_cast<std::size_t>(grown);
    }
  } catch (const EstimatorDivergence& e) {
    rethrow_diverged(e, result, x);
  }
  result.x = std::move(x);
  return result;
}

}  // namespace issa
