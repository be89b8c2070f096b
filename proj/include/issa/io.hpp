#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "issa/linalg.hpp"
#include "issa/objectives.hpp"
#include "issa/trace.hpp"

namespace issa::io {

/// Synthetic ridge data: Z_ij standard normal truncated to [-truncation,
/// truncation] by rejection, w* standard normal, y = Z w* + 0.01 * noise.
struct DatasetSpec {
  std::size_t n = 10000;
  std::size_t d = 100;
  std::uint64_t seed = 0;
  double truncation = 3.0;
  double lambda = 1e-2;

  void validate() const;
};

RidgeProblem generate_synthetic(const DatasetSpec& spec);

/// Dense rows and raw labels of a libsvm file.
struct LabeledData {
  linalg::Matrix design;
  linalg::Vector labels;
};

/// Parses "label idx:val idx:val ..." lines with 1-based indices. Blank lines
/// and '#' comments are skipped. The dimension is the largest index seen, or
/// min_dim if larger. Throws IoError naming the line on malformed input, and
/// on an empty file.
LabeledData read_libsvm(std::istream& in, std::size_t min_dim = 0);
LabeledData load_libsvm(const std::string& path, std::size_t min_dim = 0);
void write_libsvm(std::ostream& out, const linalg::Matrix& design, const linalg::Vector& labels);
void write_libsvm(const std::string& path, const linalg::Matrix& design,
                  const linalg::Vector& labels);

/// Labels to {0, 1}. Exactly two distinct labels that are both positive
/// (e.g. {1, 2}) map min -> 0, max -> 1; otherwise positive -> 1, else 0.
linalg::Vector binary_labels(const linalg::Vector& raw);

RidgeProblem load_ridge(const std::string& path, double lambda);
LogisticProblem load_logistic(const std::string& path, double lambda);

inline constexpr std::array<std::string_view, 9> kTraceColumns = {
    "iter",    "fx",          "grad_norm",  "subopt",  "c_used",
    "estimator_steps", "grad_batch", "quad_regime", "wall_ms"};

/// A trace with its "# key=value" header lines.
struct TraceFile {
  std::vector<std::pair<std::string, std::string>> metadata;
  Trace rows;

  std::optional<std::string> get(std::string_view key) const;
  bool operator==(const TraceFile&) const = default;
};

/// 17 significant digits, so parse_double(format_double(v)) == v.
std::string format_double(double value);
double parse_double(std::string_view text);

void write_trace(std::ostream& out, const TraceFile& trace);
void write_trace(const std::string& path, const TraceFile& trace);
TraceFile read_trace(std::istream& in);
TraceFile read_trace(const std::string& path);

struct TraceSummary {
  std::string name;
  std::size_t rows = 0;
  std::size_t last_iter = 0;
  double final_fx = 0.0;
  double final_grad_norm = 0.0;
  std::optional<double> final_subopt;
  std::optional<double> best_subopt;
  /// First iteration with subopt <= 1e-8.
  std::optional<std::size_t> iters_to_1e8;
};

TraceSummary summarize(std::string name, const TraceFile& trace);
/// First iteration whose subopt is at most `target`.
std::optional<std::size_t> iterations_to(const Trace& trace, double target);
void write_summary(std::ostream& out, const std::vector<TraceSummary>& summaries);

}  // namespace issa::io
