#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "issa/errors.hpp"
#include "issa/io.hpp"

using namespace issa;
using linalg::Matrix;
using linalg::Vector;
using io::TraceFile;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("issa_test_" + name);
}

TraceFile sample_trace() {
  TraceFile t;
  t.metadata = {{"variant", "theoretical"}, {"seed", "3"}};
  TraceRow r0;
  r0.iter = 0;
  r0.fx = 0.1;
  r0.grad_norm = 1.0 / 3.0;
  r0.subopt = 2.5e-17;
  r0.wall_ms = 0.0;
  TraceRow r1;
  r1.iter = 1;
  r1.fx = -1e300;
  r1.grad_norm = 5e-324;
  r1.c_used = 1.0000000000000002;
  r1.estimator_steps = 5;
  r1.grad_batch = 16;
  r1.quad_regime = true;
  t.rows = {r0, r1};
  return t;
}

}  // namespace


TEST_CASE("format_double round-trips") {
  for (double v : {0.0, -0.0, 1.0 / 3.0, 1e-300, 5e-324, 1.7976931348623157e308, -2.5, 0.1 + 0.2})
    CHECK(io::parse_double(io::format_double(v)) == v);
  CHECK(std::isinf(io::parse_double(io::format_double(INFINITY))));
  CHECK_THROWS_AS(io::parse_double("1.0x"), IoError);
  CHECK_THROWS_AS(io::parse_double(""), IoError);
}

TEST_CASE("trace write/read round trip") {
  const TraceFile t = sample_trace();
  std::stringstream buf;
  io::write_trace(buf, t);
  const std::string text = buf.str();
  CHECK(text.find("# variant=theoretical\n# seed=3\niter,fx,grad_norm,subopt,c_used,estimator_steps,"
                  "grad_batch,quad_regime,wall_ms\n") == 0);
  CHECK(text.find("NA") != std::string::npos);
  const TraceFile back = io::read_trace(buf);
  CHECK(back == t);
  CHECK(back.get("seed") == "3");
  CHECK_FALSE(back.get("missing").has_value());

  const auto path = temp_path("trace.csv");
  io::write_trace(path.string(), t);
  CHECK(io::read_trace(path.string()) == t);
  std::filesystem::remove(path);
}

TEST_CASE("trace reader rejects schema mismatches") {
  std::istringstream bad_header("iter,fx\n0,1\n");
  CHECK_THROWS_AS(io::read_trace(bad_header), IoError);
  std::istringstream short_row(
      "iter,fx,grad_norm,subopt,c_used,estimator_steps,grad_batch,quad_regime,wall_ms\n0,1,2\n");
  CHECK_THROWS_AS(io::read_trace(short_row), IoError);
  CHECK_THROWS_AS(io::read_trace(std::string("/nonexistent/dir/trace.csv")), IoError);
}

TEST_CASE("libsvm parsing") {
  std::istringstream in("# comment\n+1 1:0.5 3:2\n\n-1 2:1e-3\n");
  const io::LabeledData d = io::read_libsvm(in);
  CHECK(d.design.rows() == 2);
  CHECK(d.design.cols() == 3);
  CHECK(d.design(0, 0) == 0.5);
  CHECK(d.design(0, 1) == 0.0);
  CHECK(d.design(0, 2) == 2.0);
  CHECK(d.design(1, 1) == 1e-3);
  CHECK(d.labels == Vector{1.0, -1.0});

  std::istringstream wide("1 1:1\n");
  CHECK(io::read_libsvm(wide, 5).design.cols() == 5);
}

TEST_CASE("libsvm errors name the line") {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      io::read_libsvm(in);
    } catch (const IoError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("1 1:1\n1 0:2\n").find("line 2") != std::string::npos);
  CHECK(message("1 1:1\nabc 1:1\n").find("line 2") != std::string::npos);
  CHECK(message("1 1:x\n").find("line 1") != std::string::npos);
  CHECK(message("1 2\n").find("line 1") != std::string::npos);
  CHECK_FALSE(message("").empty());
  CHECK_FALSE(message("# only a comment\n").empty());
  CHECK_THROWS_AS(io::load_libsvm("/nonexistent/file.libsvm"), IoError);
}

TEST_CASE("libsvm write/read round trip") {
  const Matrix z{{0.0, 1.5, 0.0}, {-2.0, 0.0, 1.0 / 3.0}};
  const Vector y{1.0, 0.0};
  std::stringstream buf;
  io::write_libsvm(buf, z, y);
  const io::LabeledData back = io::read_libsvm(buf, 3);
  CHECK(back.design == z);
  CHECK(back.labels == y);
}

TEST_CASE("binary label mapping") {
  CHECK(io::binary_labels(Vector{-1, 1, 1}) == Vector{0, 1, 1});
  CHECK(io::binary_labels(Vector{0, 1}) == Vector{0, 1});
  CHECK(io::binary_labels(Vector{1, 2, 2, 1}) == Vector{0, 1, 1, 0});
  CHECK(io::binary_labels(Vector{3, 3}) == Vector{1, 1});
}

TEST_CASE("load_logistic and load_ridge") {
  const auto path = temp_path("data.libsvm");
  {
    std::ofstream out(path);
    out << "2 1:1 2:0.5\n1 2:1\n2 1:-1\n";
  }
  const LogisticProblem lp = io::load_logistic(path.string(), 0.1);
  CHECK(lp.labels == Vector{1, 0, 1});
  CHECK(lp.lambda == 0.1);
  const RidgeProblem rp = io::load_ridge(path.string(), 0.2);
  CHECK(rp.targets == Vector{2, 1, 2});
  CHECK(rp.design.cols() == 2);
  std::filesystem::remove(path);
}

TEST_CASE("synthetic data is deterministic and truncated") {
  io::DatasetSpec spec;
  spec.n = 2000;
  spec.d = 10;
  spec.seed = 5;
  const RidgeProblem a = io::generate_synthetic(spec);
  const RidgeProblem b = io::generate_synthetic(spec);
  CHECK(a.design == b.design);
  CHECK(a.targets == b.targets);
  spec.seed = 6;
  CHECK_FALSE(io::generate_synthetic(spec).design == a.design);

  double sum = 0.0, sq = 0.0, max_abs = 0.0;
  const std::size_t count = a.design.rows() * a.design.cols();
  for (std::size_t i = 0; i < a.design.rows(); ++i)
    for (std::size_t j = 0; j < a.design.cols(); ++j) {
      const double z = a.design(i, j);
      sum += z;
      sq += z * z;
      max_abs = std::max(max_abs, std::abs(z));
    }
  CHECK(max_abs <= 3.0);
  CHECK(std::abs(sum / count) < 0.03);
  // Variance of N(0,1) truncated to [-3, 3]: 1 - 2*3*phi(3)/(2*Phi(3)-1).
  const double phi3 = std::exp(-4.5) / std::sqrt(2.0 * M_PI);
  const double mass = std::erf(3.0 / std::sqrt(2.0));
  const double var = 1.0 - 6.0 * phi3 / mass;
  CHECK(var == doctest::Approx(0.97334).epsilon(1e-4));
  CHECK(sq / count == doctest::Approx(var).epsilon(0.03));

  spec.n = 0;
  CHECK_THROWS_AS(io::generate_synthetic(spec), UsageError);
  spec.n = 10;
  spec.truncation = 0.0;
  CHECK_THROWS_AS(io::generate_synthetic(spec), UsageError);
}

TEST_CASE("trace summaries") {
  TraceFile t = sample_trace();
  t.rows[1].subopt = 1e-9;
  const io::TraceSummary s = io::summarize("a", t);
  CHECK(s.rows == 2);
  CHECK(s.last_iter == 1);
  CHECK(s.final_fx == -1e300);
  CHECK(s.best_subopt == 2.5e-17);
  CHECK(s.iters_to_1e8 == std::size_t{0});
  CHECK(io::iterations_to(t.rows, 1e-20) == std::nullopt);

  std::ostringstream out;
  io::write_summary(out, {s});
  CHECK(out.str().find("trace,rows,last_iter,final_fx,final_grad_norm,final_subopt,best_subopt,"
                       "iters_to_1e-8\na,2,1,") == 0);
}
