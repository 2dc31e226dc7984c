#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "bvfim/error.hpp"
#include "bvfim/problem.hpp"
#include "bvfim/types.hpp"

namespace bvfim {

/// One recorded outer iteration. Values are those evaluated at the pair
/// (x_l, y_{k,l}) that produced the hypergradient; `x` is the iterate after
/// the update (first 8 coordinates when m > 64).
struct TraceRecord {
  std::size_t k = 0;
  std::size_t l = 0;
  std::size_t step = 0;  // cumulative x-updates: k * L + l + 1
  Vec x;
  double x_norm = 0.0;
  double F = 0.0;
  double f = 0.0;
  double f_reg = 0.0;  // NaN for baselines
  double grad_norm = 0.0;
  double dist_x = 0.0;  // NaN without a known optimum
  double dist_y = 0.0;  // distance of y to S(x_l); NaN when unknown, not in the CSV
  double wall_ms = 0.0;
  OracleCounters calls;
};

struct Trace {
  std::vector<TraceRecord> records;
  std::size_t curvature_warnings = 0;  // CG non-positive curvature events
  std::size_t infeasible_restarts = 0;  // barrier solves restarted from z
};

/// Thrown by solver runs; carries the records produced before the failure.
class RunError : public Error {
 public:
  RunError(const Error& cause, Trace partial, OracleCounters counters)
      : Error(cause.kind(), cause.what()), partial_(std::move(partial)), counters_(counters) {}

  const Trace& partial_trace() const { return partial_; }
  const OracleCounters& counters() const { return counters_; }

 private:
  Trace partial_;
  OracleCounters counters_;
};

inline constexpr const char* kTraceCsvHeader =
    "k,l,step,F,f,f_reg,grad_norm,dist_x,wall_ms,calls_gFy,calls_gfy,calls_gFx,calls_gfx,"
    "calls_hvp,calls_jvp";

/// Shortest round-trip rendering with 17 significant digits ("nan", "inf").
std::string format_double(double v);
double parse_double(const std::string& text);

void write_trace_csv(const Trace& trace, const std::filesystem::path& path);
/// Reads a file written by write_trace_csv (x vectors are not stored).
Trace read_trace_csv(const std::filesystem::path& path);

/// Writes `report` with sorted keys, adding library version and platform.
void write_report_json(const nlohmann::json& report, const std::filesystem::path& path);
nlohmann::json read_report_json(const std::filesystem::path& path);

std::string library_version();
std::string platform_string();

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace bvfim
