#include <doctest.h>

#include <cmath>
#include <vector>

#include "issa/estimator.hpp"
#include "issa/objectives.hpp"
#include "issa/sampling.hpp"
#include "issa/validation.hpp"
#include "oracles.hpp"

using namespace issa;
using linalg::Matrix;
using linalg::SymMatrix;
using linalg::Vector;
using validation::ConstantOracle;
using validation::ListOracle;

namespace {

Draw draw_of(std::vector<std::size_t> idx, std::size_t n) { return Draw(std::move(idx), n); }

ScaledObjective small_ridge(unsigned seed, std::size_t n = 30, std::size_t d = 4) {
  oracle::Random rnd(seed);
  return scale_to_unit_hessian(
      RidgeProblem{oracle::from_eigen(rnd.gaussian(n, d)), oracle::from_eigen(rnd.gaussian(n)), 0.5});
}

}  // namespace

TEST_CASE("initial state") {
  const EstimatorState s(3, EstimatorMode::practical);
  CHECK(s.r() == Matrix::identity(3));
  CHECK(s.steps() == 0);
  CHECK(fold_samples({}, Vector(3), ConstantOracle(SymMatrix(Matrix::identity(3)))) ==
        Matrix::identity(3));
}

TEST_CASE("identity samples keep R at I") {
  const ConstantOracle identity(SymMatrix(Matrix::identity(2)), 4);
  EstimatorState s(2, EstimatorMode::practical);
  for (int k = 0; k < 10; ++k) s.practical_update(draw_of({0, 1, 2}, 4), identity);
  CHECK(s.r() == Matrix::identity(2));
  CHECK(s.steps() == 30);
}

TEST_CASE("scalar constant sample gives the geometric partial sum") {
  const double q = 0.3;
  const ConstantOracle oracle(SymMatrix(Matrix{{1.0 - q}}), 10);
  EstimatorState s(1, EstimatorMode::practical);
  for (int m = 1; m <= 10; ++m) {
    s.practical_update(draw_of({static_cast<std::size_t>(m - 1)}, 10), oracle);
    CHECK(s.r()(0, 0) == doctest::Approx((1 - std::pow(q, m + 1)) / (1 - q)).epsilon(1e-14));
  }
}

TEST_CASE("commuting diagonal samples give per-entry geometric sums") {
  const ListOracle oracle({SymMatrix(Matrix::diagonal({0.5, 0.2})),
                           SymMatrix(Matrix::diagonal({0.1, 0.9}))});
  EstimatorState s(2, EstimatorMode::practical);
  s.practical_update(draw_of({0, 1}, 2), oracle);
  s.practical_update(draw_of({1, 0}, 2), oracle);
  // Scalar recursion r <- 1 + (1 - x) r per entry, in draw order 0, 1, 1, 0.
  for (int e = 0; e < 2; ++e) {
    const double xs[2] = {e == 0 ? 0.5 : 0.2, e == 0 ? 0.1 : 0.9};
    double r = 1.0;
    for (int j : {0, 1, 1, 0}) r = 1.0 + (1.0 - xs[j]) * r;
    CHECK(s.r()(e, e) == doctest::Approx(r).epsilon(1e-14));
  }
  CHECK(s.r()(0, 1) == 0.0);
}

TEST_CASE("practical R replays from its history") {
  const ScaledObjective obj = small_ridge(1);
  EstimatorState s(obj.dim(), EstimatorMode::practical);
  OrderedSampler sampler(SamplingSpec{obj.population(), 3, 7});
  for (int k = 0; k < 8; ++k) s.practical_update(sampler.draw(), obj);
  CHECK(s.r() == fold_samples(s.history(), Vector(obj.dim()), obj));
}

TEST_CASE("fold order matters for non-commuting samples") {
  const ListOracle oracle({SymMatrix(Matrix{{0.5, 0.2}, {0.2, 0.3}}),
                           SymMatrix(Matrix{{0.1, -0.05}, {-0.05, 0.8}})});
  const std::vector<std::size_t> ab{0, 1}, ba{1, 0};
  CHECK(fold_samples(ab, Vector(2), oracle) != fold_samples(ba, Vector(2), oracle));
}

TEST_CASE("branch equivalence on constant-Hessian objectives with no truncation") {
  const ScaledObjective obj = small_ridge(2);
  EstimatorState practical(obj.dim(), EstimatorMode::practical);
  EstimatorState theoretical(obj.dim(), EstimatorMode::theoretical, kNoTruncation);
  OrderedSampler a(SamplingSpec{obj.population(), 4, 3}), b(SamplingSpec{obj.population(), 4, 3});
  oracle::Random rnd(4);
  for (int k = 0; k < 10; ++k) {
    practical.practical_update(a.draw(), obj);
    theoretical.extend_history(b.draw());
    theoretical.theoretical_rebuild(oracle::from_eigen(rnd.gaussian(obj.dim())), obj);
    CHECK(practical.r() == theoretical.r());
    CHECK(practical.steps() == theoretical.steps());
  }
}

TEST_CASE("truncation cap") {
  const ScaledObjective obj = small_ridge(3);
  EstimatorState zero(obj.dim(), EstimatorMode::theoretical, 0);
  zero.extend_history(draw_of({0, 1, 2}, obj.population()));
  zero.theoretical_rebuild(Vector(obj.dim()), obj);
  CHECK(zero.r() == Matrix::identity(obj.dim()));
  CHECK(zero.folded() == 0);
  CHECK(zero.steps() == 3);

  EstimatorState capped(obj.dim(), EstimatorMode::theoretical, 2);
  capped.extend_history(draw_of({0, 1, 2, 3}, obj.population()));
  capped.theoretical_rebuild(Vector(obj.dim()), obj);
  const std::vector<std::size_t> last{2, 3};
  CHECK(capped.r() == fold_samples(last, Vector(obj.dim()), obj));
  CHECK(capped.folded() == 2);
}

TEST_CASE("rebuild on a logistic problem is reproducible") {
  oracle::Random rnd(5);
  Vector labels(40);
  for (auto& y : labels) y = rnd.uniform() < 0.5 ? 0 : 1;
  const ScaledObjective obj =
      scale_to_unit_hessian(LogisticProblem{oracle::from_eigen(rnd.gaussian(40, 5)), labels, 0.1});
  auto build = [&] {
    EstimatorState s(5, EstimatorMode::theoretical, 50);
    OrderedSampler sampler(SamplingSpec{40, 3, 99});
    Vector x(5, 0.3);
    for (int k = 0; k < 30; ++k) {
      s.extend_history(sampler.draw());
      s.theoretical_rebuild(x, obj);
      x[0] += 0.01;
    }
    return s.r();
  };
  CHECK(build() == build());
}

TEST_CASE("mode misuse is rejected") {
  const ScaledObjective ridge = small_ridge(6);
  EstimatorState theoretical(ridge.dim(), EstimatorMode::theoretical);
  CHECK_THROWS_AS(theoretical.practical_update(draw_of({0}, ridge.population()), ridge), UsageError);
  EstimatorState practical(ridge.dim(), EstimatorMode::practical);
  CHECK_THROWS_AS(practical.extend_history(draw_of({0}, ridge.population())), UsageError);

  oracle::Random rnd(7);
  const ScaledObjective logistic = scale_to_unit_hessian(
      LogisticProblem{oracle::from_eigen(rnd.gaussian(10, 2)), Vector(10, 1.0), 0.1});
  CHECK_THROWS_AS(practical.practical_update(draw_of({0}, 10), logistic), UsageError);
}

TEST_CASE("divergence guard on samples outside [0, I]") {
  const ConstantOracle bad(SymMatrix(Matrix{{3.0}}), 1);
  EstimatorState s(1, EstimatorMode::practical);
  CHECK_THROWS_AS(
      [&] {
        for (int k = 0; k < 100; ++k) s.practical_update(draw_of({0}, 1), bad);
      }(),
      EstimatorDivergence);
}

TEST_CASE("norm bound ||R|| <= 1 + steps") {
  const ScaledObjective obj = small_ridge(8);
  EstimatorState s(obj.dim(), EstimatorMode::practical);
  OrderedSampler sampler(SamplingSpec{obj.population(), 2, 1});
  for (int k = 0; k < 20; ++k) {
    s.practical_update(sampler.draw(), obj);
    CHECK(oracle::spectral_norm(oracle::to_eigen(s.r())) <= 1.0 + s.steps());
  }
}

TEST_CASE("expected_estimator closed form") {
  CHECK(expected_estimator(SymMatrix(Matrix::identity(3)), 7) == SymMatrix(Matrix::identity(3)));
  CHECK(expected_estimator(SymMatrix(Matrix{{0.5}}), 3)(0, 0) == doctest::Approx(1.875));

  oracle::Random rnd(9);
  const Eigen::MatrixXd h = rnd.spd(6, 0.2, 1.0);
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(6, 6), power = Eigen::MatrixXd::Identity(6, 6);
  const Eigen::MatrixXd c = Eigen::MatrixXd::Identity(6, 6) - h;
  for (int j = 0; j <= 12; ++j) {
    ref += power;
    power = power * c;
  }
  const SymMatrix got = expected_estimator(SymMatrix::symmetrized(oracle::from_eigen(h)), 12);
  CHECK((oracle::to_eigen(got) - ref).norm() <= 1e-12 * ref.norm());
}

TEST_CASE("approx_error_bound values") {
  CHECK(approx_error_bound(1.0, 5) == 0.0);
  CHECK(approx_error_bound(0.5, 10) == doctest::Approx(0.001953125));
  CHECK_THROWS_AS(approx_error_bound(0.0, 5), UsageError);
}

TEST_CASE("expected_estimator approaches the inverse monotonically within the bound") {
  oracle::Random rnd(10);
  for (int trial = 0; trial < 50; ++trial) {
    const double alpha = rnd.uniform(0.1, 0.9);
    Eigen::MatrixXd h = rnd.spd(6, alpha, 1.0);
    // Pin lambda_min to alpha exactly.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    Eigen::VectorXd lam = es.eigenvalues();
    lam(0) = alpha;
    h = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    const SymMatrix hs = SymMatrix::symmetrized(oracle::from_eigen(h));
    const Eigen::MatrixXd inv = h.inverse();
    double previous = INFINITY;
    for (std::size_t m : {1, 2, 5, 10, 20, 40}) {
      const double err = oracle::spectral_norm(oracle::to_eigen(expected_estimator(hs, m)) - inv);
      // Absolute slack for rounding once the error reaches machine precision.
      const double floor = 1e-14 / alpha;
      CHECK(err <= approx_error_bound(alpha, m) * (1 + 1e-10) + floor);
      CHECK(err <= previous * (1 + 1e-12) + floor);
      previous = err;
    }
  }
}

TEST_CASE("Monte Carlo mean of R matches the closed form") {
  // Independent samples: tau = 1 draws.
  const ScaledObjective obj = small_ridge(11, 60, 10);
  const std::size_t m = 20, trials = 10000;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(10, 10), sq = Eigen::MatrixXd::Zero(10, 10);
  for (std::size_t t = 0; t < trials; ++t) {
    OrderedSampler sampler(SamplingSpec{obj.population(), 1, derive_seed(77, t)});
    EstimatorState s(10, EstimatorMode::practical);
    for (std::size_t k = 0; k < m; ++k) s.practical_update(sampler.draw(), obj);
    const Eigen::MatrixXd r = oracle::to_eigen(s.r());
    sum += r;
    sq += r.cwiseProduct(r);
  }
  const Eigen::MatrixXd mean = sum / trials;
  const Eigen::MatrixXd se =
      ((sq / trials - mean.cwiseProduct(mean)) * (trials / (trials - 1.0)) / trials).cwiseSqrt();
  const Eigen::MatrixXd expected = oracle::to_eigen(expected_estimator(obj.full_hessian(Vector(10)), m));
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) CHECK(std::abs(mean(i, j) - expected(i, j)) <= 4.0 * se(i, j));
}
