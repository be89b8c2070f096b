// Command-line front end: data generation, ISSA and baseline runs,
// validation checks and trace comparison.
//
// Exit codes: 0 success, 1 usage, 2 numeric failure, 3 I/O.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "issa/baselines.hpp"
#include "issa/io.hpp"
#include "issa/objectives.hpp"
#include "issa/optimizer.hpp"
#include "issa/validation.hpp"

namespace {

using issa::linalg::Vector;
using Metadata = std::vector<std::pair<std::string, std::string>>;

enum Exit { kOk = 0, kUsage = 1, kNumeric = 2, kIo = 3 };

struct DataOptions {
  std::string objective = "ridge";
  std::string data;
  std::string synthetic;
  double lambda = 1e-2;
  double truncation = 3.0;
  std::optional<double> f_star;
};

struct OutputOptions {
  std::string trace;
  bool no_timing = false;
};

struct Problem {
  issa::ScaledObjective objective;
  std::optional<double> f_star;
  Metadata metadata;
};

void add_data_options(CLI::App& cmd, DataOptions& data) {
  cmd.add_option("--objective", data.objective, "Loss")
      ->check(CLI::IsMember({"ridge", "logistic"}))
      ->capture_default_str();
  auto* file = cmd.add_option("--data", data.data, "libsvm dataset");
  auto* synth = cmd.add_option("--synthetic", data.synthetic, "Synthetic ridge data n,d,seed");
  file->excludes(synth);
  cmd.add_option("--lambda", data.lambda, "L2 regularization")->capture_default_str();
  cmd.add_option("--truncation", data.truncation, "Synthetic entry truncation")
      ->capture_default_str();
  cmd.add_option("--f-star", data.f_star, "Known optimal value (fills subopt)");
}

void add_output_options(CLI::App& cmd, OutputOptions& out) {
  cmd.add_option("--trace", out.trace, "Trace CSV path (stdout if omitted)");
  cmd.add_flag("--no-timing", out.no_timing, "Leave wall_ms empty for reproducible files");
}

std::string fmt(double v) { return issa::io::format_double(v); }

issa::io::DatasetSpec parse_synthetic(const std::string& text, const DataOptions& data) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) parts.push_back(part);
  if (parts.size() != 3) throw issa::UsageError("--synthetic expects n,d,seed");
  issa::io::DatasetSpec spec;
  try {
    spec.n = std::stoull(parts[0]);
    spec.d = std::stoull(parts[1]);
    spec.seed = std::stoull(parts[2]);
  } catch (const std::exception&) {
    throw issa::UsageError("--synthetic expects n,d,seed as integers");
  }
  spec.truncation = data.truncation;
  spec.lambda = data.lambda;
  return spec;
}

Problem load_problem(const DataOptions& data) {
  if (data.data.empty() == data.synthetic.empty()) {
    throw issa::UsageError("give exactly one of --data or --synthetic");
  }
  Metadata meta{{"objective", data.objective}, {"lambda", fmt(data.lambda)}};
  std::optional<issa::ScaledObjective> objective;
  if (!data.synthetic.empty()) {
    if (data.objective != "ridge") throw issa::UsageError("--synthetic data is ridge only");
    meta.emplace_back("data", "synthetic:" + data.synthetic);
    meta.emplace_back("truncation", fmt(data.truncation));
    objective = issa::scale_to_unit_hessian(
        issa::io::generate_synthetic(parse_synthetic(data.synthetic, data)));
  } else {
    meta.emplace_back("data", data.data);
    if (data.objective == "ridge") {
      objective = issa::scale_to_unit_hessian(issa::io::load_ridge(data.data, data.lambda));
    } else {
      objective = issa::scale_to_unit_hessian(issa::io::load_logistic(data.data, data.lambda));
    }
  }
  std::optional<double> f_star = data.f_star;
  if (!f_star && objective->loss() == issa::Loss::ridge) {
    f_star = objective->value(issa::ridge_minimizer(*objective));
  }
  meta.emplace_back("n", std::to_string(objective->population()));
  meta.emplace_back("d", std::to_string(objective->dim()));
  meta.emplace_back("scale", fmt(objective->scale()));
  meta.emplace_back("alpha", fmt(objective->alpha()));
  meta.emplace_back("beta", fmt(objective->beta()));
  meta.emplace_back("f_star", f_star ? fmt(*f_star) : "NA");
  return {std::move(*objective), f_star, std::move(meta)};
}

std::string join(const std::vector<std::size_t>& values) {
  if (values.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(values[i]);
  }
  return out;
}

void emit_trace(const OutputOptions& out, Metadata meta, const issa::RunResult& result) {
  meta.emplace_back("batch_warnings", join(result.batch_warnings));
  meta.emplace_back("unstable_at",
                    result.unstable_at ? std::to_string(*result.unstable_at) : "none");
  const issa::io::TraceFile file{std::move(meta), result.trace};
  if (out.trace.empty()) {
    issa::io::write_trace(std::cout, file);
  } else {
    issa::io::write_trace(out.trace, file);
    const auto& last = result.trace.back();
    std::cerr << "wrote " << result.trace.size() << " rows to " << out.trace
              << " (final grad_norm " << fmt(last.grad_norm) << ")\n";
  }
}

// Runs `body`; a divergence still writes the partial trace before failing.
template <class Body>
void run_and_emit(const OutputOptions& out, Metadata meta, Body body) {
  try {
    emit_trace(out, meta, body());
  } catch (const issa::RunDiverged& e) {
    meta.emplace_back("error", e.what());
    if (!e.partial().trace.empty()) emit_trace(out, meta, e.partial());
    throw;
  }
}

// run

struct RunOptions {
  DataOptions data;
  OutputOptions out;
  std::string variant = "practical";
  std::string step_mode = "fixed";
  std::string truncate_cap = "100";
  issa::RunConfig config;
};

std::size_t parse_cap(const std::string& text) {
  if (text == "inf") return issa::kNoTruncation;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw issa::UsageError("--truncate-cap expects a count or 'inf'");
  }
}

void setup_run(CLI::App& app, RunOptions& opt) {
  auto* cmd = app.add_subcommand("run", "Run ISSA");
  add_data_options(*cmd, opt.data);
  add_output_options(*cmd, opt.out);
  auto& c = opt.config;
  cmd->add_option("--variant", opt.variant)
      ->check(CLI::IsMember({"practical", "theoretical", "online"}))
      ->capture_default_str();
  cmd->add_option("--tau", c.tau, "Hessian samples per iteration")->capture_default_str();
  cmd->add_option("--step-mode", opt.step_mode)
      ->check(CLI::IsMember({"theorem1", "fixed"}))
      ->capture_default_str();
  cmd->add_option("--c", c.c_fixed, "Fixed step divisor")->capture_default_str();
  cmd->add_option("--iters", c.max_iters)->capture_default_str();
  cmd->add_option("--grad-tol", c.grad_tol)->capture_default_str();
  cmd->add_option("--seed", c.seed, "Hessian sampler seed")->capture_default_str();
  cmd->add_option("--truncate-cap", opt.truncate_cap, "Rebuild history cap or 'inf'")
      ->capture_default_str();
  cmd->add_option("--grad-batch", c.online.grad_batch0)->capture_default_str();
  cmd->add_option("--grad-growth", c.online.growth)->capture_default_str();
  cmd->add_option("--grad-seed", c.online.grad_seed)->capture_default_str();
  cmd->callback([&opt] {
    auto& cfg = opt.config;
    cfg.variant = opt.variant == "practical"     ? issa::Variant::practical
                  : opt.variant == "theoretical" ? issa::Variant::theoretical
                                                 : issa::Variant::online;
    cfg.step_mode = opt.step_mode == "theorem1" ? issa::StepMode::theorem1 : issa::StepMode::fixed;
    cfg.truncate_cap = parse_cap(opt.truncate_cap);
    cfg.record_time = !opt.out.no_timing;

    Problem p = load_problem(opt.data);
    Metadata meta = p.metadata;
    meta.insert(meta.begin(), {"command", "run"});
    meta.emplace_back("variant", issa::to_string(cfg.variant));
    meta.emplace_back("tau", std::to_string(cfg.tau));
    meta.emplace_back("step_mode", issa::to_string(cfg.step_mode));
    meta.emplace_back("c", fmt(cfg.c_fixed));
    meta.emplace_back("iters", std::to_string(cfg.max_iters));
    meta.emplace_back("grad_tol", fmt(cfg.grad_tol));
    meta.emplace_back("seed", std::to_string(cfg.seed));
    meta.emplace_back("truncate_cap", opt.truncate_cap);
    if (cfg.variant == issa::Variant::online) {
      meta.emplace_back("grad_batch", std::to_string(cfg.online.grad_batch0));
      meta.emplace_back("grad_growth", fmt(cfg.online.growth));
      meta.emplace_back("grad_seed", std::to_string(cfg.online.grad_seed));
    }
    const Vector x0(p.objective.dim());
    run_and_emit(opt.out, meta, [&] { return issa::run(cfg, p.objective, x0, p.f_star); });
  });
}

// baseline

struct BaselineOptions {
  DataOptions data;
  OutputOptions out;
  std::string algo = "gd";
  issa::baselines::LissaConfig lissa;
  std::size_t lbfgs_mem = 5;
  double step = 1.0;
  std::uint64_t seed = 0;
  issa::baselines::Options run;
};

void setup_baseline(CLI::App& app, BaselineOptions& opt) {
  auto* cmd = app.add_subcommand("baseline", "Run a reference optimizer");
  add_data_options(*cmd, opt.data);
  add_output_options(*cmd, opt.out);
  cmd->add_option("--algo", opt.algo)
      ->check(CLI::IsMember({"gd", "lissa", "lbfgs", "bfgs"}))
      ->capture_default_str();
  cmd->add_option("--lissa-s1", opt.lissa.s1)->capture_default_str();
  cmd->add_option("--lissa-s2", opt.lissa.s2)->capture_default_str();
  cmd->add_option("--lbfgs-mem", opt.lbfgs_mem)->capture_default_str();
  cmd->add_option("--step", opt.step, "Step length for gd and lissa")->capture_default_str();
  cmd->add_option("--seed", opt.seed, "LISSA sampling seed")->capture_default_str();
  cmd->add_option("--iters", opt.run.max_iters)->capture_default_str();
  cmd->add_option("--grad-tol", opt.run.grad_tol)->capture_default_str();
  cmd->callback([&opt] {
    Problem p = load_problem(opt.data);
    opt.run.f_star = p.f_star;
    opt.run.record_time = !opt.out.no_timing;
    opt.lissa.step = opt.step;
    Metadata meta = p.metadata;
    meta.insert(meta.begin(), {"command", "baseline"});
    meta.emplace_back("algo", opt.algo);
    meta.emplace_back("iters", std::to_string(opt.run.max_iters));
    meta.emplace_back("grad_tol", fmt(opt.run.grad_tol));
    if (opt.algo == "gd" || opt.algo == "lissa") meta.emplace_back("step", fmt(opt.step));
    if (opt.algo == "lissa") {
      meta.emplace_back("lissa_s1", std::to_string(opt.lissa.s1));
      meta.emplace_back("lissa_s2", std::to_string(opt.lissa.s2));
      meta.emplace_back("seed", std::to_string(opt.seed));
    }
    if (opt.algo == "lbfgs") meta.emplace_back("lbfgs_mem", std::to_string(opt.lbfgs_mem));

    const Vector x0(p.objective.dim());
    namespace b = issa::baselines;
    run_and_emit(opt.out, meta, [&] {
      if (opt.algo == "gd") return b::gd_run(p.objective, x0, opt.step, opt.run);
      if (opt.algo == "lissa") return b::lissa_run(p.objective, x0, opt.lissa, opt.seed, opt.run);
      if (opt.algo == "lbfgs") return b::lbfgs_run(p.objective, x0, opt.lbfgs_mem, opt.run);
      return b::bfgs_run(p.objective, x0, opt.run);
    });
  });
}

// validate

struct ValidateOptions {
  std::string check;
  double alpha = 0.5;
  std::size_t m = 30;
  std::size_t d = 10;
  std::size_t n = 100;
  std::size_t trials = 5000;
  std::size_t tau = 1;
  std::size_t steps = 10;
  std::size_t grid = 0;
  double grad_norm = 0.05;
  std::uint64_t seed = 0;
  std::string out;
};

// Synthetic ridge whose scaled alpha equals opt.alpha.
issa::ScaledObjective validation_ridge(const ValidateOptions& opt) {
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) throw issa::UsageError("--alpha must lie in (0, 1)");
  issa::io::DatasetSpec spec;
  spec.n = opt.n;
  spec.d = opt.d;
  spec.seed = opt.seed;
  issa::RidgeProblem problem = issa::io::generate_synthetic(spec);
  problem.lambda = issa::ridge_lambda_for_alpha(problem.design, opt.alpha);
  return issa::scale_to_unit_hessian(std::move(problem));
}

template <class Write>
void write_report(const std::string& path, Write write) {
  if (path.empty()) return;
  std::ofstream file(path);
  if (!file) throw issa::IoError("cannot open '" + path + "' for writing");
  write(file);
  if (!file) throw issa::IoError("failed writing '" + path + "'");
}

const char* verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

void print_moment(const issa::validation::MomentReport& r) {
  std::cout << issa::validation::to_string(r.quantity) << " alpha=" << fmt(r.alpha)
            << " m=" << r.m << " empirical=" << fmt(r.empirical);
  if (r.trials > 0) std::cout << " stderr=" << fmt(r.std_error) << " trials=" << r.trials;
  std::cout << " bound=" << fmt(r.bound) << " " << verdict(r.pass) << "\n";
}

void print_steps(const std::vector<issa::validation::StepCheck>& steps) {
  for (const auto& s : steps) {
    std::cout << "  k=" << s.k << " grad_norm=" << fmt(s.grad_norm) << " mean=" << fmt(s.mean)
              << " stderr=" << fmt(s.std_error) << " required=" << fmt(s.required) << " "
              << verdict(s.pass) << "\n";
  }
}

void validate_deterministic(const ValidateOptions& opt) {
  namespace v = issa::validation;
  std::vector<v::MomentReport> reports;
  auto check = [&](const issa::linalg::SymMatrix& h, std::size_t m, double alpha) {
    reports.push_back(opt.check == "first-moment" ? v::check_first_moment(h, m, alpha)
                                                  : v::check_approx_bound(h, m, alpha));
  };
  if (opt.grid > 0) {
    for (const auto& c : v::spd_grid(opt.grid, opt.d, opt.seed)) {
      for (std::size_t m : {5, 10, 20, 50, 100}) check(c.h, m, c.alpha);
    }
  } else {
    issa::Xoshiro256 rng(opt.seed);
    check(v::random_spd(opt.d, opt.alpha, rng), opt.m, opt.alpha);
  }
  std::size_t failures = 0;
  for (const auto& r : reports) {
    if (!r.pass) ++failures;
    if (opt.grid == 0 || !r.pass) print_moment(r);
  }
  std::cout << opt.check << ": " << reports.size() - failures << "/" << reports.size()
            << " passed\n";
  write_report(opt.out, [&](std::ostream& os) { v::write_csv(os, reports); });
}

void setup_validate(CLI::App& app, ValidateOptions& opt) {
  auto* cmd = app.add_subcommand("validate", "Check an estimator or convergence bound");
  cmd->add_option("--check", opt.check)
      ->required()
      ->check(CLI::IsMember({"first-moment", "second-moment", "contraction", "quad-regime",
                             "approx-bound", "expectation"}));
  cmd->add_option("--alpha", opt.alpha, "Strong convexity of the test problem")
      ->capture_default_str();
  cmd->add_option("--m", opt.m, "Samples per estimator")->capture_default_str();
  cmd->add_option("--d", opt.d, "Dimension")->capture_default_str();
  cmd->add_option("--n", opt.n, "Data points (Monte Carlo checks)")->capture_default_str();
  cmd->add_option("--trials", opt.trials)->capture_default_str();
  cmd->add_option("--tau", opt.tau, "Samples per ordered draw")->capture_default_str();
  cmd->add_option("--steps", opt.steps, "Contraction steps")->capture_default_str();
  cmd->add_option("--grid", opt.grid,
                  "Random SPD matrices with alpha in [0.1, 0.9], m in {5,10,20,50,100}")
      ->capture_default_str();
  cmd->add_option("--grad-norm", opt.grad_norm, "Starting gradient norm (quad-regime)")
      ->capture_default_str();
  cmd->add_option("--seed", opt.seed)->capture_default_str();
  cmd->add_option("--out", opt.out, "Report CSV path");
  cmd->callback([&opt] {
    namespace v = issa::validation;
    if (opt.check == "first-moment" || opt.check == "approx-bound") {
      validate_deterministic(opt);
      return;
    }
    const issa::ScaledObjective objective = validation_ridge(opt);
    const Vector zero(objective.dim());
    if (opt.check == "second-moment") {
      const auto r = v::check_second_moment(objective, zero, opt.m, opt.trials, opt.seed, opt.tau);
      print_moment(r);
      write_report(opt.out, [&](std::ostream& os) { v::write_csv(os, {r}); });
    } else if (opt.check == "expectation") {
      const auto r = v::check_expectation(objective, zero, opt.m, opt.trials, opt.seed, opt.tau);
      std::cout << "expectation m=" << r.m << " trials=" << r.trials
                << " ||mean - expected||_2=" << fmt(r.deviation_norm)
                << " 4*||stderr||_2=" << fmt(4.0 * r.std_error_norm)
                << " max_z=" << fmt(r.max_z) << " " << verdict(r.pass) << "\n";
    } else if (opt.check == "contraction") {
      const auto r = v::check_contraction(objective, zero, opt.tau, opt.steps, opt.trials, opt.seed);
      std::cout << "contraction alpha=" << fmt(r.alpha) << " beta=" << fmt(r.beta)
                << " tau=" << r.tau << " trials=" << r.trials << " " << verdict(r.pass) << "\n";
      print_steps(r.steps);
      write_report(opt.out, [&](std::ostream& os) { v::write_csv(os, r.steps); });
    } else {
      issa::Xoshiro256 rng(issa::derive_seed(opt.seed, 1));
      const Vector x0 = v::point_at_grad_norm(objective, opt.grad_norm, rng);
      const auto r = v::check_quadratic_regime(objective, x0, opt.tau, opt.trials, opt.seed);
      std::cout << "quad-regime alpha=" << fmt(r.alpha) << " beta=" << fmt(r.beta) << " window=["
                << fmt(r.window.lower) << ", " << fmt(r.window.upper) << "]"
                << (r.window.empty() ? " (empty)" : "") << " steps_in_regime=" << r.steps_in_regime
                << " " << verdict(r.pass) << "\n";
      print_steps(r.steps);
      write_report(opt.out, [&](std::ostream& os) { v::write_csv(os, r.steps); });
    }
  });
}

// generate, compare

struct GenerateOptions {
  issa::io::DatasetSpec spec;
  std::string out;
};

void setup_generate(CLI::App& app, GenerateOptions& opt) {
  auto* cmd = app.add_subcommand("generate", "Write a synthetic ridge dataset (libsvm)");
  cmd->add_option("--n", opt.spec.n)->capture_default_str();
  cmd->add_option("--d", opt.spec.d)->capture_default_str();
  cmd->add_option("--seed", opt.spec.seed)->capture_default_str();
  cmd->add_option("--truncation", opt.spec.truncation)->capture_default_str();
  cmd->add_option("--out", opt.out)->required();
  cmd->callback([&opt] {
    const issa::RidgeProblem p = issa::io::generate_synthetic(opt.spec);
    issa::io::write_libsvm(opt.out, p.design, p.targets);
  });
}

struct CompareOptions {
  std::vector<std::string> traces;
  std::string out;
};

void setup_compare(CLI::App& app, CompareOptions& opt) {
  auto* cmd = app.add_subcommand("compare", "Summarize traces side by side");
  cmd->add_option("--traces", opt.traces, "Comma-separated trace CSVs")
      ->required()
      ->delimiter(',');
  cmd->add_option("--out", opt.out, "Summary CSV path (stdout if omitted)");
  cmd->callback([&opt] {
    std::vector<issa::io::TraceSummary> summaries;
    for (const auto& path : opt.traces) {
      summaries.push_back(issa::io::summarize(path, issa::io::read_trace(path)));
    }
    if (opt.out.empty()) {
      issa::io::write_summary(std::cout, summaries);
    } else {
      write_report(opt.out, [&](std::ostream& os) { issa::io::write_summary(os, summaries); });
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ISSA stochastic second-order optimization"};
  app.require_subcommand(1);

  GenerateOptions generate;
  RunOptions run;
  BaselineOptions baseline;
  ValidateOptions validate;
  CompareOptions compare;
  setup_generate(app, generate);
  setup_run(app, run);
  setup_baseline(app, baseline);
  setup_validate(app, validate);
  setup_compare(app, compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const issa::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const issa::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const issa::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}
