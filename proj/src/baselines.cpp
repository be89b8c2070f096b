#include "issa/baselines.hpp"

#include <cmath>
#include <string>

#include "issa/estimator.hpp"
#include "trace_recorder.hpp"

namespace issa::baselines {

using linalg::Matrix;
using linalg::Vector;

namespace {

void check_start(const ScaledObjective& objective, const Vector& x0, const Options& options) {
  if (x0.size() != objective.dim()) throw DimensionError("baseline: x0 has the wrong dimension");
  if (!(options.grad_tol >= 0.0)) throw UsageError("baseline: grad_tol must be non-negative");
}

struct Start {
  detail::TraceRecorder recorder;
  RunResult result;
  Vector x;
  Vector g;

  Start(const ScaledObjective& objective, const Vector& x0, const Options& options)
      : recorder(objective, options.f_star, options.record_time), x(x0), g(objective.gradient(x0)) {
    recorder.record(TraceRow{}, x, g, result);
  }

  double grad_norm() const { return result.trace.back().grad_norm; }

  RunResult finish() {
    result.x = std::move(x);
    return std::move(result);
  }
};

// Searches x + t d for an Armijo decrease; returns the accepted t, or nothing.
std::optional<double> backtrack(const ScaledObjective& objective, const Vector& x, double fx,
                                const Vector& g, const Vector& d) {
  const double slope = linalg::dot(g, d);
  double t = 1.0;
  for (int halving = 0; halving <= kMaxHalvings; ++halving, t *= kBacktrack) {
    Vector trial = x;
    linalg::axpy(t, d, trial);
    const double f_trial = objective.value(trial);
    if (f_trial <= fx + kArmijo * t * slope) return t;
  }
  return std::nullopt;
}

}  // namespace

RunResult gd_run(const ScaledObjective& objective, const Vector& x0, double step,
                 const Options& options) {
  check_start(objective, x0, options);
  if (!(step > 0.0)) throw UsageError("gd_run: step must be positive");
  Start run(objective, x0, options);
  for (std::size_t k = 1; k <= options.max_iters && run.grad_norm() > options.grad_tol; ++k) {
    linalg::axpy(-step, run.g, run.x);
    run.g = objective.gradient(run.x);
    TraceRow row;
    row.iter = k;
    row.c_used = 1.0 / step;
    run.recorder.record(row, run.x, run.g, run.result);
  }
  return run.finish();
}

void LissaConfig::validate() const {
  if (s1 < 1) throw UsageError("LissaConfig: s1 must be at least 1");
  if (!(step > 0.0)) throw UsageError("LissaConfig: step must be positive");
}

Vector lissa_direction(const SampleOracle& oracle, const Vector& x, const Vector& gradient,
                       std::size_t s2, Xoshiro256& rng) {
  Vector u = gradient;
  for (std::size_t i = 0; i < s2; ++i) {
    const std::size_t j = rng.bounded(oracle.population());
    u = gradient + oracle.hessian_sample(j, x).complement_apply(u);
  }
  for (double v : u) {
    if (!(std::abs(v) <= kDivergenceThreshold)) {
      throw EstimatorDivergence("LISSA direction diverged (are the Hessian samples bounded by I?)");
    }
  }
  return u;
}

RunResult lissa_run(const ScaledObjective& objective, const Vector& x0, const LissaConfig& config,
                    std::uint64_t seed, const Options& options) {
  check_start(objective, x0, options);
  config.validate();
  Xoshiro256 rng(seed);
  Start run(objective, x0, options);
  std::size_t samples = 0;
  try {
    for (std::size_t k = 1; k <= options.max_iters && run.grad_norm() > options.grad_tol; ++k) {
      Vector direction(objective.dim());
      for (std::size_t r = 0; r < config.s1; ++r) {
        direction += lissa_direction(objective, run.x, run.g, config.s2, rng);
      }
      direction *= 1.0 / static_cast<double>(config.s1);
      samples += config.s1 * config.s2;

      linalg::axpy(-config.step, direction, run.x);
      run.g = objective.gradient(run.x);
      TraceRow row;
      row.iter = k;
      row.c_used = 1.0 / config.step;
      row.estimator_steps = samples;
      run.recorder.record(row, run.x, run.g, run.result);
    }
  } catch (const EstimatorDivergence& e) {
    run.result.x = run.x;
    throw RunDiverged(e.what(), std::move(run.result));
  }
  return run.finish();
}

LbfgsMemory::LbfgsMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity < 1) throw UsageError("L-BFGS memory must be at least 1");
}

bool LbfgsMemory::push(Vector s, Vector y) {
  const double sy = linalg::dot(s, y);
  if (!(sy > 0.0)) return false;
  if (pairs_.size() == capacity_) pairs_.pop_front();
  pairs_.push_back({std::move(s), std::move(y), 1.0 / sy});
  return true;
}

Vector LbfgsMemory::direction(const Vector& gradient) const {
  Vector q = gradient;
  std::vector<double> a(pairs_.size());
  for (std::size_t i = pairs_.size(); i-- > 0;) {
    const Pair& p = pairs_[i];
    a[i] = p.rho * linalg::dot(p.s, q);
    linalg::axpy(-a[i], p.y, q);
  }
  if (!pairs_.empty()) {
    const Pair& newest = pairs_.back();
    q *= 1.0 / (newest.rho * linalg::dot(newest.y, newest.y));
  }
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const Pair& p = pairs_[i];
    const double b = p.rho * linalg::dot(p.y, q);
    linalg::axpy(a[i] - b, p.s, q);
  }
  q *= -1.0;
  return q;
}

BfgsInverse::BfgsInverse(std::size_t dim) : h_(Matrix::identity(dim)) {}

bool BfgsInverse::update(const Vector& s, const Vector& y) {
  const double sy = linalg::dot(s, y);
  if (!(sy > 0.0)) return false;
  if (!scaled_) {
    h_ *= sy / linalg::dot(y, y);
    scaled_ = true;
  }
  // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T, expanded.
  const double rho = 1.0 / sy;
  const Vector hy = linalg::matvec(h_, y);
  const double yhy = linalg::dot(y, hy);
  const std::size_t d = s.size();
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      h_(i, j) += -rho * (s[i] * hy[j] + hy[i] * s[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
    }
  }
  return true;
}

Vector BfgsInverse::direction(const Vector& gradient) const {
  return -1.0 * linalg::matvec(h_, gradient);
}

namespace {

template <class Approx>
RunResult quasi_newton(const ScaledObjective& objective, const Vector& x0, Approx& approx,
                       const Options& options) {
  check_start(objective, x0, options);
  Start run(objective, x0, options);
  for (std::size_t k = 1; k <= options.max_iters && run.grad_norm() > options.grad_tol; ++k) {
    Vector d = approx.direction(run.g);
    if (!(linalg::dot(d, run.g) < 0.0)) d = -1.0 * run.g;
    const double fx = run.result.trace.back().fx;
    std::optional<double> t = backtrack(objective, run.x, fx, run.g, d);
    if (!t) break;

    Vector x_next = run.x;
    linalg::axpy(*t, d, x_next);
    Vector g_next = objective.gradient(x_next);
    approx.update_pair(x_next - run.x, g_next - run.g);
    run.x = std::move(x_next);
    run.g = std::move(g_next);

    TraceRow row;
    row.iter = k;
    row.c_used = 1.0 / *t;
    run.recorder.record(row, run.x, run.g, run.result);
  }
  return run.finish();
}

struct LbfgsAdapter {
  LbfgsMemory memory;
  Vector direction(const Vector& g) const { return memory.direction(g); }
  void update_pair(Vector s, Vector y) { memory.push(std::move(s), std::move(y)); }
};

struct BfgsAdapter {
  BfgsInverse inverse;
  Vector direction(const Vector& g) const { return inverse.direction(g); }
  void update_pair(const Vector& s, const Vector& y) { inverse.update(s, y); }
};

}  // namespace

RunResult lbfgs_run(const ScaledObjective& objective, const Vector& x0, std::size_t mem,
                    const Options& options) {
  LbfgsAdapter approx{LbfgsMemory(mem)};
  return quasi_newton(objective, x0, approx, options);
}

RunResult bfgs_run(const ScaledObjective& objective, const Vector& x0, const Options& options) {
  BfgsAdapter approx{BfgsInverse(objective.dim())};
  return quasi_newton(objective, x0, approx, options);
}

}  // namespace issa::baselines
