#include <doctest.h>

#include <vector>

#include "issa/objectives.hpp"
#include "oracles.hpp"

using namespace issa;
using linalg::Matrix;
using linalg::SymMatrix;
using linalg::Vector;

namespace {

RidgeProblem random_ridge(std::size_t n, std::size_t d, double lambda, unsigned seed) {
  oracle::Random rnd(seed);
  return {oracle::from_eigen(rnd.gaussian(n, d)), oracle::from_eigen(rnd.gaussian(n)), lambda};
}

LogisticProblem random_logistic(std::size_t n, std::size_t d, double lambda, unsigned seed) {
  oracle::Random rnd(seed);
  Vector labels(n);
  for (auto& y : labels) y = rnd.uniform() < 0.5 ? 0.0 : 1.0;
  return {oracle::from_eigen(rnd.gaussian(n, d)), labels, lambda};
}

}  // namespace

TEST_CASE("ridge scaling: single point e1, lambda 1") {
  const ScaledObjective obj = scale_to_unit_hessian(RidgeProblem{Matrix{{1, 0, 0}}, {1.0}, 1.0});
  CHECK(obj.scale() == 2.0);
  CHECK(obj.alpha() == 0.5);
  CHECK(obj.hessian_constant());
  const SymMatrix h = obj.full_hessian(Vector(3));
  CHECK(h(0, 0) == 1.0);
  CHECK(h(1, 1) == 0.5);
  CHECK(h(2, 2) == 0.5);
  const SymMatrix x0 = obj.hessian_sample(0, Vector(3)).to_dense();
  CHECK(x0 == h);
  // F(0) with y = 1 is (1/2) / s.
  CHECK(obj.value(Vector(3)) == doctest::Approx(0.25));
}

TEST_CASE("ridge scaling: unit-norm rows, lambda 0.1") {
  const ScaledObjective obj =
      scale_to_unit_hessian(RidgeProblem{Matrix{{1, 0}, {0, 1}, {0.6, 0.8}}, {0, 0, 0}, 0.1});
  CHECK(obj.scale() == doctest::Approx(1.1));
  CHECK(obj.value(Vector{0, 0}) == 0.0);
}

TEST_CASE("scaling rejects non-positive lambda") {
  CHECK_THROWS_AS(scale_to_unit_hessian(RidgeProblem{Matrix{{1.0}}, {1.0}, 0.0}), UsageError);
  CHECK_THROWS_AS(scale_to_unit_hessian(LogisticProblem{Matrix{{1.0}}, {1.0}, -1.0}), UsageError);
  CHECK_THROWS_AS(scale_to_unit_hessian(LogisticProblem{Matrix{{1.0}}, {2.0}, 1.0}), UsageError);
}

TEST_CASE("every scaled Hessian sample lies between 0 and I") {
  const ScaledObjective ridge = scale_to_unit_hessian(random_ridge(50, 10, 0.3, 1));
  const ScaledObjective logistic = scale_to_unit_hessian(random_logistic(50, 10, 0.3, 2));
  oracle::Random rnd(3);
  for (const ScaledObjective* obj : {&ridge, &logistic}) {
    for (int point = 0; point < 3; ++point) {
      const Vector x = oracle::from_eigen(rnd.gaussian(10));
      for (std::size_t i = 0; i < obj->population(); ++i) {
        const Eigen::VectorXd eig = oracle::eigenvalues(oracle::to_eigen(obj->hessian_sample(i, x).to_dense()));
        CHECK(eig.minCoeff() >= -1e-12);
        CHECK(eig.maxCoeff() <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("alpha I <= full Hessian <= beta I <= I") {
  const ScaledObjective ridge = scale_to_unit_hessian(random_ridge(60, 8, 0.5, 4));
  const ScaledObjective logistic = scale_to_unit_hessian(random_logistic(60, 8, 0.5, 5));
  CHECK(ridge.alpha() <= ridge.beta());
  CHECK(ridge.beta() <= 1.0);
  const Eigen::VectorXd eig = oracle::eigenvalues(oracle::to_eigen(ridge.full_hessian(Vector(8))));
  CHECK(eig.minCoeff() >= ridge.alpha());
  CHECK(eig.maxCoeff() <= ridge.beta());

  oracle::Random rnd(6);
  for (int point = 0; point < 5; ++point) {
    const Vector x = oracle::from_eigen(rnd.gaussian(8));
    const Eigen::VectorXd e = oracle::eigenvalues(oracle::to_eigen(logistic.full_hessian(x)));
    CHECK(e.minCoeff() >= logistic.alpha() * (1 - 1e-12));
    CHECK(e.maxCoeff() <= 1.0);
  }
  // beta is measured at 0, where logistic curvature peaks.
  const Eigen::VectorXd e0 = oracle::eigenvalues(oracle::to_eigen(logistic.full_hessian(Vector(8))));
  CHECK(e0.maxCoeff() <= logistic.beta());
}

TEST_CASE("values match a term-by-term sum") {
  const RidgeProblem rp = random_ridge(40, 6, 0.2, 7);
  const LogisticProblem lp = random_logistic(40, 6, 0.2, 8);
  const ScaledObjective ridge = scale_to_unit_hessian(rp);
  const ScaledObjective logistic = scale_to_unit_hessian(lp);
  oracle::Random rnd(9);
  for (int k = 0; k < 10; ++k) {
    const Eigen::VectorXd x = rnd.gaussian(6);
    CHECK(ridge.value(oracle::from_eigen(x)) ==
          doctest::Approx(oracle::naive_ridge(oracle::to_eigen(rp.design), oracle::to_eigen(rp.targets),
                                              rp.lambda, ridge.scale(), x))
              .epsilon(1e-12));
    CHECK(logistic.value(oracle::from_eigen(x)) ==
          doctest::Approx(oracle::naive_logistic(oracle::to_eigen(lp.design),
                                                 oracle::to_eigen(lp.labels), lp.lambda,
                                                 logistic.scale(), x))
              .epsilon(1e-12));
  }
}

TEST_CASE("logistic value is stable for large margins") {
  const ScaledObjective obj =
      scale_to_unit_hessian(LogisticProblem{Matrix{{1.0}, {-1.0}}, {1.0, 0.0}, 0.1});
  const double v = obj.value(Vector{800.0});
  CHECK(std::isfinite(v));
  CHECK(std::isfinite(linalg::norm2(obj.gradient(Vector{800.0}))));
  CHECK(std::isfinite(obj.value(Vector{-800.0})));
}

TEST_CASE("ridge gradient equals H x - b assembled explicitly") {
  const RidgeProblem rp = random_ridge(30, 5, 0.4, 10);
  const ScaledObjective obj = scale_to_unit_hessian(rp);
  const Eigen::MatrixXd z = oracle::to_eigen(rp.design);
  const Eigen::VectorXd y = oracle::to_eigen(rp.targets);
  const double n = 30.0, s = obj.scale();
  const Eigen::MatrixXd h = (z.transpose() * z / n + rp.lambda * Eigen::MatrixXd::Identity(5, 5)) / s;
  const Eigen::VectorXd b = z.transpose() * y / n / s;
  oracle::Random rnd(11);
  const Eigen::VectorXd x = rnd.gaussian(5);
  CHECK((oracle::to_eigen(obj.gradient(oracle::from_eigen(x))) - (h * x - b)).norm() <= 1e-12);
  CHECK((oracle::to_eigen(obj.full_hessian(oracle::from_eigen(x))) - h).norm() <= 1e-12);
}

TEST_CASE("gradient vanishes at the ridge minimizer") {
  const ScaledObjective obj = scale_to_unit_hessian(random_ridge(30, 5, 0.4, 12));
  CHECK(linalg::norm2(obj.gradient(ridge_minimizer(obj))) <= 1e-10);
}

TEST_CASE("gradients and Hessians match finite differences") {
  const ScaledObjective ridge = scale_to_unit_hessian(random_ridge(25, 4, 0.3, 13));
  const ScaledObjective logistic = scale_to_unit_hessian(random_logistic(25, 4, 0.3, 14));
  oracle::Random rnd(15);
  for (const ScaledObjective* obj : {&ridge, &logistic}) {
    auto f = [&](const Eigen::VectorXd& x) { return obj->value(oracle::from_eigen(x)); };
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd x = rnd.gaussian(4);
      const Eigen::VectorXd g = oracle::to_eigen(obj->gradient(oracle::from_eigen(x)));
      CHECK((oracle::finite_gradient(f, x) - g).norm() <= 1e-6 * std::max(1.0, g.norm()));
    }
    const Eigen::VectorXd x = rnd.gaussian(4);
    const Eigen::MatrixXd h = oracle::to_eigen(obj->full_hessian(oracle::from_eigen(x)));
    for (int j = 0; j < 4; ++j) {
      auto gj = [&](const Eigen::VectorXd& p) { return obj->gradient(oracle::from_eigen(p))[j]; };
      const Eigen::VectorXd row = oracle::finite_gradient(gj, x);
      CHECK((row - h.row(j).transpose()).norm() <= 1e-5 * std::max(1.0, h.norm()));
    }
  }
}

TEST_CASE("batch gradient") {
  const ScaledObjective obj = scale_to_unit_hessian(random_logistic(6, 3, 0.2, 16));
  const Vector x{0.3, -0.2, 0.5};
  std::vector<std::size_t> all{5, 0, 3, 1, 2, 4};
  CHECK(obj.batch_gradient(x, all) == obj.gradient(x));
  CHECK_THROWS_AS(obj.batch_gradient(x, std::vector<std::size_t>{}), UsageError);
  CHECK_THROWS_AS(obj.batch_gradient(x, std::vector<std::size_t>{6}), UsageError);

  const ScaledObjective single = scale_to_unit_hessian(RidgeProblem{Matrix{{1.0, 2.0}}, {1.0}, 0.5});
  CHECK(single.batch_gradient(Vector{0.1, 0.2}, std::vector<std::size_t>{0}) ==
        single.gradient(Vector{0.1, 0.2}));

  // Mean over every size-2 subset equals the full gradient.
  Vector sum(3);
  int count = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = i + 1; j < 6; ++j) {
      sum += obj.batch_gradient(x, std::vector<std::size_t>{i, j});
      ++count;
    }
  }
  sum *= 1.0 / count;
  const Vector full = obj.gradient(x);
  for (std::size_t k = 0; k < 3; ++k) CHECK(sum[k] == doctest::Approx(full[k]).epsilon(1e-12));
}

TEST_CASE("Hessian samples average to the full Hessian") {
  const ScaledObjective ridge = scale_to_unit_hessian(random_ridge(40, 5, 0.2, 17));
  const ScaledObjective logistic = scale_to_unit_hessian(random_logistic(40, 5, 0.2, 18));
  const Vector x{0.1, -0.4, 0.2, 0.0, 0.3};
  for (const ScaledObjective* obj : {&ridge, &logistic}) {
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(5, 5);
    for (std::size_t i = 0; i < 40; ++i) mean += oracle::to_eigen(obj->hessian_sample(i, x).to_dense());
    mean /= 40.0;
    CHECK((mean - oracle::to_eigen(obj->full_hessian(x))).norm() <= 1e-12);
  }
}

TEST_CASE("zero row gives the shift alone") {
  const ScaledObjective obj =
      scale_to_unit_hessian(RidgeProblem{Matrix{{0.0, 0.0}, {1.0, 1.0}}, {0.0, 1.0}, 0.5});
  const SymMatrix x0 = obj.hessian_sample(0, Vector(2)).to_dense();
  CHECK(x0(0, 0) == doctest::Approx(0.5 / obj.scale()));
  CHECK(x0(0, 1) == 0.0);
  CHECK_THROWS_AS(obj.hessian_sample(2, Vector(2)), UsageError);
}

TEST_CASE("strong convexity and smoothness sandwich") {
  const ScaledObjective obj = scale_to_unit_hessian(random_logistic(40, 5, 0.5, 19));
  oracle::Random rnd(20);
  for (int k = 0; k < 1000; ++k) {
    const Vector x = oracle::from_eigen(rnd.gaussian(5));
    const Vector h = oracle::from_eigen(rnd.gaussian(5));
    const double base = obj.value(x) + linalg::dot(obj.gradient(x), h);
    const double hh = linalg::dot(h, h);
    const double f = obj.value(x + h);
    CHECK(f >= base + 0.5 * obj.alpha() * hh - 1e-12);
    CHECK(f <= base + 0.5 * hh + 1e-12);
  }
}

TEST_CASE("ridge_lambda_for_alpha") {
  const RidgeProblem rp = random_ridge(20, 4, 1.0, 21);
  RidgeProblem copy = rp;
  copy.lambda = ridge_lambda_for_alpha(rp.design, 0.25);
  CHECK(scale_to_unit_hessian(copy).alpha() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(ridge_lambda_for_alpha(rp.design, 1.0), UsageError);
}

TEST_CASE("with_scale leaves beta unclamped") {
  const RidgeProblem rp = random_ridge(30, 4, 0.1, 22);
  const ScaledObjective good = scale_to_unit_hessian(rp);
  const ScaledObjective loose =
      ScaledObjective::with_scale(Loss::ridge, rp.design, rp.targets, rp.lambda,
                                  good.scale() / 10.0, Vector(4));
  CHECK(loose.beta() > 1.0);
}
