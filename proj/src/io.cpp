#include "issa/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "issa/rng.hpp"

namespace issa::io {

using linalg::Matrix;
using linalg::Vector;

void DatasetSpec::validate() const {
  if (n < 1 || d < 1) throw UsageError("DatasetSpec: n and d must be at least 1");
  if (!(truncation > 0.0)) throw UsageError("DatasetSpec: truncation must be positive");
  if (!(lambda > 0.0)) throw UsageError("DatasetSpec: lambda must be positive");
}

RidgeProblem generate_synthetic(const DatasetSpec& spec) {
  spec.validate();
  Xoshiro256 rng(spec.seed);
  RidgeProblem problem{Matrix(spec.n, spec.d), Vector(spec.n), spec.lambda};
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t j = 0; j < spec.d; ++j) {
      double z;
      do {
        z = rng.normal();
      } while (std::abs(z) > spec.truncation);
      problem.design(i, j) = z;
    }
  }
  Vector w(spec.d);
  for (double& v : w) v = rng.normal();
  problem.targets = linalg::matvec(problem.design, w);
  for (double& y : problem.targets) y += 0.01 * rng.normal();
  return problem;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, end);
}

double parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    throw IoError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

namespace {

std::size_t parse_count(std::string_view text) {
  std::size_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    throw IoError("not a count: '" + std::string(text) + "'");
  }
  return value;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct SparseRow {
  double label;
  std::vector<std::pair<std::size_t, double>> entries;
};

}  // namespace

LabeledData read_libsvm(std::istream& in, std::size_t min_dim) {
  std::vector<SparseRow> rows;
  std::size_t dim = min_dim;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = trim(line);
    if (const auto hash = body.find('#'); hash != std::string_view::npos) {
      body = trim(body.substr(0, hash));
    }
    if (body.empty()) continue;
    try {
      std::istringstream tokens{std::string(body)};
      std::string token;
      tokens >> token;
      SparseRow row{parse_double(token), {}};
      while (tokens >> token) {
        const auto colon = token.find(':');
        if (colon == std::string::npos) throw IoError("expected idx:val, got '" + token + "'");
        const std::size_t index = parse_count(std::string_view(token).substr(0, colon));
        if (index < 1) throw IoError("feature indices are 1-based");
        const double value = parse_double(std::string_view(token).substr(colon + 1));
        row.entries.emplace_back(index - 1, value);
        dim = std::max(dim, index);
      }
      rows.push_back(std::move(row));
    } catch (const IoError& e) {
      throw IoError("libsvm line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (rows.empty()) throw IoError("libsvm input has no data rows");
  if (dim == 0) throw IoError("libsvm input has no features");

  LabeledData data{Matrix(rows.size(), dim), Vector(rows.size())};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    data.labels[i] = rows[i].label;
    for (auto [j, v] : rows[i].entries) data.design(i, j) = v;
  }
  return data;
}

LabeledData load_libsvm(const std::string& path, std::size_t min_dim) {
  auto in = open_in(path);
  try {
    return read_libsvm(in, min_dim);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_libsvm(std::ostream& out, const Matrix& design, const Vector& labels) {
  if (design.rows() != labels.size()) throw DimensionError("write_libsvm: row/label mismatch");
  for (std::size_t i = 0; i < design.rows(); ++i) {
    out << format_double(labels[i]);
    for (std::size_t j = 0; j < design.cols(); ++j) {
      if (design(i, j) != 0.0) out << ' ' << j + 1 << ':' << format_double(design(i, j));
    }
    out << '\n';
  }
}

void write_libsvm(const std::string& path, const Matrix& design, const Vector& labels) {
  auto out = open_out(path);
  write_libsvm(out, design, labels);
  if (!out) throw IoError("failed writing '" + path + "'");
}

Vector binary_labels(const Vector& raw) {
  const std::set<double> distinct(raw.begin(), raw.end());
  Vector mapped(raw.size());
  const bool two_positive = distinct.size() == 2 && *distinct.begin() > 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    mapped[i] = two_positive ? (raw[i] == *distinct.rbegin() ? 1.0 : 0.0) : (raw[i] > 0.0 ? 1.0 : 0.0);
  }
  return mapped;
}

RidgeProblem load_ridge(const std::string& path, double lambda) {
  LabeledData data = load_libsvm(path);
  return {std::move(data.design), std::move(data.labels), lambda};
}

LogisticProblem load_logistic(const std::string& path, double lambda) {
  LabeledData data = load_libsvm(path);
  return {std::move(data.design), binary_labels(data.labels), lambda};
}

std::optional<std::string> TraceFile::get(std::string_view key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return std::nullopt;
}

namespace {

constexpr std::string_view kNa = "NA";

std::string optional_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string(kNa);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::optional<double> parse_optional(std::string_view s) {
  if (s == kNa) return std::nullopt;
  return parse_double(s);
}

std::string header_line() {
  std::string header;
  for (std::size_t i = 0; i < kTraceColumns.size(); ++i) {
    if (i) header += ',';
    header += kTraceColumns[i];
  }
  return header;
}

}  // namespace

void write_trace(std::ostream& out, const TraceFile& trace) {
  for (const auto& [key, value] : trace.metadata) {
    if (key.find('=') != std::string::npos || key.find('\n') != std::string::npos ||
        value.find('\n') != std::string::npos) {
      throw UsageError("write_trace: metadata key '" + key + "' cannot be stored");
    }
    out << "# " << key << '=' << value << '\n';
  }
  out << header_line() << '\n';
  for (const TraceRow& r : trace.rows) {
    out << r.iter << ',' << format_double(r.fx) << ',' << format_double(r.grad_norm) << ','
        << optional_field(r.subopt) << ',' << optional_field(r.c_used) << ','
        << r.estimator_steps << ','
        << (r.grad_batch ? std::to_string(*r.grad_batch) : std::string(kNa)) << ','
        << (r.quad_regime ? 1 : 0) << ',' << optional_field(r.wall_ms) << '\n';
  }
}

void write_trace(const std::string& path, const TraceFile& trace) {
  auto out = open_out(path);
  write_trace(out, trace);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

TraceFile read_trace(std::istream& in) {
  TraceFile trace;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (line.rfind("# ", 0) == 0) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
          throw IoError("trace line " + std::to_string(line_no) + ": metadata without '='");
        }
        trace.metadata.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
        continue;
      }
      if (line != header_line()) {
        throw IoError("trace line " + std::to_string(line_no) + ": expected header '" +
                      header_line() + "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != kTraceColumns.size()) {
      throw IoError("trace line " + std::to_string(line_no) + ": expected " +
                    std::to_string(kTraceColumns.size()) + " fields, got " +
                    std::to_string(f.size()));
    }
    try {
      TraceRow r;
      r.iter = parse_count(f[0]);
      r.fx = parse_double(f[1]);
      r.grad_norm = parse_double(f[2]);
      r.subopt = parse_optional(f[3]);
      r.c_used = parse_optional(f[4]);
      r.estimator_steps = parse_count(f[5]);
      if (f[6] != kNa) r.grad_batch = parse_count(f[6]);
      if (f[7] != "0" && f[7] != "1") throw IoError("quad_regime must be 0 or 1");
      r.quad_regime = f[7] == "1";
      r.wall_ms = parse_optional(f[8]);
      trace.rows.push_back(r);
    } catch (const IoError& e) {
      throw IoError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!header_seen) throw IoError("trace has no header line");
  return trace;
}

TraceFile read_trace(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_trace(in);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::optional<std::size_t> iterations_to(const Trace& trace, double target) {
  for (const TraceRow& r : trace) {
    if (r.subopt && *r.subopt <= target) return r.iter;
  }
  return std::nullopt;
}

TraceSummary summarize(std::string name, const TraceFile& trace) {
  TraceSummary s;
  s.name = std::move(name);
  s.rows = trace.rows.size();
  if (trace.rows.empty()) return s;
  const TraceRow& last = trace.rows.back();
  s.last_iter = last.iter;
  s.final_fx = last.fx;
  s.final_grad_norm = last.grad_norm;
  s.final_subopt = last.subopt;
  for (const TraceRow& r : trace.rows) {
    if (r.subopt && (!s.best_subopt || *r.subopt < *s.best_subopt)) s.best_subopt = r.subopt;
  }
  s.iters_to_1e8 = iterations_to(trace.rows, 1e-8);
  return s;
}

void write_summary(std::ostream& out, const std::vector<TraceSummary>& summaries) {
  out << "trace,rows,last_iter,final_fx,final_grad_norm,final_subopt,best_subopt,iters_to_1e-8\n";
  for (const auto& s : summaries) {
    out << s.name << ',' << s.rows << ',' << s.last_iter << ',' << format_double(s.final_fx)
        << ',' << format_double(s.final_grad_norm) << ',' << optional_field(s.final_subopt) << ','
        << optional_field(s.best_subopt) << ','
        << (s.iters_to_1e8 ? std::to_string(*s.iters_to_1e8) : std::string(kNa)) << '\n';
  }
}

}  // namespace issa::io
