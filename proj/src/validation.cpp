#include "issa/validation.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include "issa/estimator.hpp"
#include "issa/io.hpp"
#include "issa/sampling.hpp"
#include "parallel.hpp"

namespace issa::validation {

using linalg::Matrix;
using linalg::SymMatrix;
using linalg::Vector;

const char* to_string(Quantity quantity) {
  switch (quantity) {
    case Quantity::approx_error: return "approx_error";
    case Quantity::first_moment_lambda_max: return "first_moment_lambda_max";
    case Quantity::second_moment_lambda_max: return "second_moment_lambda_max";
  }
  return "?";
}

namespace {

bool within(double value, double bound) {
  return value <= bound + kRoundingSlack * std::max(1.0, std::abs(bound));
}

void check_alpha(double alpha, const char* where) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw UsageError(std::string(where) + ": alpha must lie in (0, 1]");
  }
}

struct MeanSe {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanSe mean_se(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = values.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

std::uint64_t step_seed(std::uint64_t seed, std::size_t k, std::size_t trial) {
  return derive_seed(derive_seed(seed, k), trial);
}

}  // namespace

MomentReport check_approx_bound(const SymMatrix& h, std::size_t m, double alpha) {
  check_alpha(alpha, "check_approx_bound");
  const Matrix diff = expected_estimator(h, m).matrix() - linalg::inverse_spd(h);
  MomentReport report;
  report.quantity = Quantity::approx_error;
  report.empirical = linalg::spectral_norm(diff);
  report.bound = approx_error_bound(alpha, m);
  report.m = m;
  report.alpha = alpha;
  report.pass = within(report.empirical, report.bound);
  return report;
}

MomentReport check_first_moment(const SymMatrix& h, std::size_t m, double alpha) {
  check_alpha(alpha, "check_first_moment");
  if (m < 1) throw UsageError("check_first_moment: m must be at least 1");
  const auto eig = linalg::symmetric_eigenvalues(expected_estimator(h, m));
  const double q = 1.0 - alpha;
  MomentReport report;
  report.quantity = Quantity::first_moment_lambda_max;
  report.empirical = -eig.front();
  report.bound = -q * q * (1.0 - std::pow(q, 2.0 * static_cast<double>(m) - 2.0)) /
                 (2.0 * alpha - alpha * alpha);
  report.m = m;
  report.alpha = alpha;
  report.pass = within(report.empirical, report.bound);
  return report;
}

Matrix sample_estimator(const SampleOracle& oracle, const Vector& x, std::size_t m,
                        std::size_t tau, std::uint64_t seed) {
  OrderedSampler sampler(SamplingSpec{oracle.population(), tau, seed});
  std::vector<std::size_t> indices;
  indices.reserve(m);
  while (indices.size() < m) {
    const Draw draw = sampler.draw(std::min(tau, m - indices.size()));
    indices.insert(indices.end(), draw.begin(), draw.end());
  }
  return fold_samples(indices, x, oracle);
}

MomentReport check_second_moment(const SampleOracle& oracle, const Vector& x, std::size_t m,
                                 double alpha, std::size_t trials, std::uint64_t seed,
                                 std::size_t tau) {
  check_alpha(alpha, "check_second_moment");
  if (trials < 100) throw UsageError("check_second_moment: need at least 100 trials");
  MomentReport report;
  report.quantity = Quantity::second_moment_lambda_max;
  report.bound = (2.0 - alpha) / (alpha * alpha) + std::pow(1.0 - alpha, static_cast<double>(m));
  report.trials = trials;
  report.m = m;
  report.alpha = alpha;

  std::vector<std::optional<Matrix>> builds = detail::parallel_map(
      trials, [&](std::size_t t) -> std::optional<Matrix> {
        try {
          return sample_estimator(oracle, x, m, tau, derive_seed(seed, t));
        } catch (const EstimatorDivergence&) {
          return std::nullopt;
        }
      });

  const std::size_t d = oracle.dim();
  Matrix mean(d, d);
  for (const auto& r : builds) {
    if (!r) {
      report.empirical = std::numeric_limits<double>::infinity();
      report.pass = false;
      return report;
    }
    mean += linalg::matmul(linalg::transpose(*r), *r);
  }
  mean *= 1.0 / static_cast<double>(trials);
  const auto eig = linalg::symmetric_eigen(SymMatrix::symmetrized(mean));
  Vector top(d);
  for (std::size_t i = 0; i < d; ++i) top[i] = eig.vectors(i, d - 1);

  std::vector<double> q(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const Vector rv = linalg::matvec(*builds[t], top);
    q[t] = linalg::dot(rv, rv);
  }
  report.empirical = eig.values.back();
  report.std_error = mean_se(q).std_error;
  report.pass = report.empirical <= report.bound + 3.0 * report.std_error;
  return report;
}

MomentReport check_second_moment(const ScaledObjective& objective, const Vector& x, std::size_t m,
                                 std::size_t trials, std::uint64_t seed, std::size_t tau) {
  return check_second_moment(static_cast<const SampleOracle&>(objective), x, m, objective.alpha(),
                             trials, seed, tau);
}

ExpectationReport check_expectation(const ScaledObjective& objective, const Vector& x,
                                    std::size_t m, std::size_t trials, std::uint64_t seed,
                                    std::size_t tau) {
  if (trials < 2) throw UsageError("check_expectation: need at least 2 trials");
  const std::vector<Matrix> builds = detail::parallel_map(trials, [&](std::size_t t) {
    return sample_estimator(objective, x, m, tau, derive_seed(seed, t));
  });

  const std::size_t d = objective.dim();
  const double n = static_cast<double>(trials);
  Matrix mean(d, d);
  for (const Matrix& r : builds) mean += r;
  mean *= 1.0 / n;
  Matrix var(d, d);
  for (const Matrix& r : builds) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        const double e = r(i, j) - mean(i, j);
        var(i, j) += e * e;
      }
    }
  }

  const Matrix expected = expected_estimator(objective.full_hessian(x), m).matrix();
  Matrix deviation = mean - expected;
  Matrix se(d, d);
  ExpectationReport report;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      se(i, j) = std::sqrt(var(i, j) / (n - 1.0) / n);
      if (se(i, j) > 0.0) {
        report.max_z = std::max(report.max_z, std::abs(deviation(i, j)) / se(i, j));
      }
    }
  }
  report.deviation_norm = linalg::spectral_norm(deviation);
  report.std_error_norm = linalg::spectral_norm(se);
  report.trials = trials;
  report.m = m;
  report.pass = report.deviation_norm <= 4.0 * report.std_error_norm;
  return report;
}

ContractionReport check_contraction(const ScaledObjective& objective, const Vector& x0,
                                    std::size_t tau, std::size_t steps, std::size_t trials,
                                    std::uint64_t seed) {
  if (objective.loss() != Loss::ridge) throw UsageError("check_contraction: ridge objectives only");
  if (trials < 2) throw UsageError("check_contraction: need at least 2 trials");
  const double f_star = objective.value(ridge_minimizer(objective));
  const double alpha = objective.alpha();
  const double beta = objective.beta();

  ContractionReport report{alpha, beta, tau, trials, {}, true};
  Vector x = x0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const Vector g = objective.gradient(x);
    const double fx = objective.value(x);
    const double m = static_cast<double>(k * tau);
    const double c = step_size_or_limit(alpha, beta, m);

    const std::vector<Vector> next = detail::parallel_map(trials, [&](std::size_t t) {
      const Matrix r = sample_estimator(objective, x, k * tau, tau, step_seed(seed, k, t));
      return issa_step(x, r, g, c);
    });
    std::vector<double> decrease(trials);
    for (std::size_t t = 0; t < trials; ++t) decrease[t] = fx - objective.value(next[t]);
    const MeanSe stats = mean_se(decrease);

    StepCheck step;
    step.k = k;
    step.subopt = fx - f_star;
    step.grad_norm = linalg::norm2(g);
    step.mean = stats.mean;
    step.std_error = stats.std_error;
    step.required = compute_mu(alpha, beta, m) * step.subopt;
    step.pass = step.mean >= step.required - 4.0 * step.std_error;
    report.pass = report.pass && step.pass;
    report.steps.push_back(step);
    x = next.front();
  }
  return report;
}

RegimeReport check_quadratic_regime(const ScaledObjective& objective, const Vector& x0,
                                    std::size_t tau, std::size_t trials, std::uint64_t seed,
                                    std::size_t max_steps) {
  if (trials < 2) throw UsageError("check_quadratic_regime: need at least 2 trials");
  const double alpha = objective.alpha();
  const double beta = objective.beta();
  RegimeReport report;
  report.window = quad_regime_window(alpha, beta, static_cast<double>(tau));
  report.alpha = alpha;
  report.beta = beta;
  report.trials = trials;

  const double f_star = objective.loss() == Loss::ridge
                            ? objective.value(ridge_minimizer(objective))
                            : std::numeric_limits<double>::quiet_NaN();
  Vector x = x0;
  bool all_pass = true;
  for (std::size_t k = 1; k <= max_steps; ++k) {
    const Vector g = objective.gradient(x);
    const double grad_norm = linalg::norm2(g);
    if (!quad_regime_check(grad_norm, alpha, beta, static_cast<double>(k * tau))) break;

    const std::vector<Vector> next = detail::parallel_map(trials, [&](std::size_t t) {
      const Matrix r = sample_estimator(objective, x, k * tau, tau, step_seed(seed, k, t));
      return issa_step(x, r, g, 1.0);
    });
    std::vector<double> norms(trials);
    for (std::size_t t = 0; t < trials; ++t) norms[t] = linalg::norm2(objective.gradient(next[t]));
    const MeanSe stats = mean_se(norms);

    StepCheck step;
    step.k = k;
    step.subopt = objective.value(x) - f_star;
    step.grad_norm = grad_norm;
    step.mean = stats.mean;
    step.std_error = stats.std_error;
    step.required = 4.0 * beta / (alpha * alpha) * grad_norm * grad_norm;
    step.pass = step.mean <= step.required + 4.0 * step.std_error;
    report.steps.push_back(step);
    all_pass = all_pass && step.pass;
    if (all_pass) ++report.steps_in_regime;
    x = next.front();
  }
  report.pass = !report.steps.empty() && all_pass;
  return report;
}

Vector point_at_grad_norm(const ScaledObjective& objective, double grad_norm, Xoshiro256& rng) {
  if (objective.loss() != Loss::ridge) throw UsageError("point_at_grad_norm: ridge objectives only");
  const Vector x_star = ridge_minimizer(objective);
  Vector u(objective.dim());
  for (double& v : u) v = rng.normal();
  const double hu = linalg::norm2(linalg::matvec(objective.full_hessian(x_star), u));
  Vector x = x_star;
  linalg::axpy(grad_norm / hu, u, x);
  return x;
}

double subopt_bound(double grad_norm, double alpha) {
  check_alpha(alpha, "subopt_bound");
  return grad_norm * grad_norm / (2.0 * alpha);
}

SymMatrix random_spd(std::size_t d, double alpha, Xoshiro256& rng) {
  if (d == 0) throw UsageError("random_spd: dimension must be at least 1");
  check_alpha(alpha, "random_spd");
  Vector spectrum(d);
  for (std::size_t i = 0; i < d; ++i) {
    spectrum[i] = i == 0 ? alpha : i == 1 ? 1.0 : alpha + (1.0 - alpha) * rng.uniform();
  }

  // Orthonormalize a Gaussian matrix column by column (modified Gram-Schmidt).
  Matrix q(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) q(i, j) = rng.normal();
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t p = 0; p < j; ++p) {
      double proj = 0.0;
      for (std::size_t i = 0; i < d; ++i) proj += q(i, p) * q(i, j);
      for (std::size_t i = 0; i < d; ++i) q(i, j) -= proj * q(i, p);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < d; ++i) norm += q(i, j) * q(i, j);
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < d; ++i) q(i, j) /= norm;
  }
  const Matrix h = linalg::matmul(linalg::matmul(q, Matrix::diagonal(spectrum)), linalg::transpose(q));
  return SymMatrix::symmetrized(h);
}

std::vector<SpdCase> spd_grid(std::size_t count, std::size_t d, std::uint64_t seed,
                              double alpha_lo, double alpha_hi) {
  Xoshiro256 rng(seed);
  std::vector<SpdCase> cases;
  cases.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double alpha = alpha_lo + (alpha_hi - alpha_lo) * rng.uniform();
    cases.push_back({random_spd(d, alpha, rng), alpha});
  }
  return cases;
}

ConstantOracle::ConstantOracle(SymMatrix h, std::size_t population)
    : h_(std::move(h)), population_(population) {
  if (population == 0) throw UsageError("ConstantOracle: population must be at least 1");
}

HessianSample ConstantOracle::hessian_sample(std::size_t i, const Vector&) const {
  if (i >= population_) throw UsageError("ConstantOracle: index out of range");
  return HessianSample::dense(h_);
}

ListOracle::ListOracle(std::vector<SymMatrix> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw UsageError("ListOracle: need at least one sample");
  for (const auto& s : samples_) {
    if (s.size() != samples_.front().size()) throw DimensionError("ListOracle: mixed dimensions");
  }
}

HessianSample ListOracle::hessian_sample(std::size_t i, const Vector&) const {
  if (i >= samples_.size()) throw UsageError("ListOracle: index out of range");
  return HessianSample::dense(samples_[i]);
}

SymMatrix ListOracle::mean() const {
  Matrix sum(dim(), dim());
  for (const auto& s : samples_) sum += s.matrix();
  sum *= 1.0 / static_cast<double>(samples_.size());
  return SymMatrix::symmetrized(sum);
}

void write_csv(std::ostream& out, const std::vector<MomentReport>& reports) {
  out << "quantity,empirical,std_error,bound,trials,m,alpha,pass\n";
  for (const auto& r : reports) {
    out << to_string(r.quantity) << ',' << io::format_double(r.empirical) << ','
        << io::format_double(r.std_error) << ',' << io::format_double(r.bound) << ',' << r.trials
        << ',' << r.m << ',' << io::format_double(r.alpha) << ',' << (r.pass ? 1 : 0) << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<StepCheck>& steps) {
  out << "k,subopt,grad_norm,mean,std_error,required,pass\n";
  for (const auto& s : steps) {
    out << s.k << ',' << io::format_double(s.subopt) << ',' << io::format_double(s.grad_norm)
        << ',' << io::format_double(s.mean) << ',' << io::format_double(s.std_error) << ','
        << io::format_double(s.required) << ',' << (s.pass ? 1 : 0) << '\n';
  }
}

}  // namespace issa::validation
