#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bvfim/runspec.hpp"

namespace bvfim {

struct Experiment {
  RunSpec spec;
  std::string hash;
  RunResult result;  // partial when `error` is set
  std::optional<Error> error;
  nlohmann::json summary;
};

/// Builds the problem and runs the configured solver. Solver failures are
/// captured in `error` with the partial trace kept; configuration errors
/// throw.
Experiment execute(const RunSpec& spec);

/// BVFIM_OUTPUT_ROOT when set, otherwise spec.output_dir.
std::filesystem::path output_root(const RunSpec& spec);

/// Writes trace.csv, summary.json and spec.ini under output_root/hash and
/// returns that directory.
std::filesystem::path write_experiment(const Experiment& e);

/// RFC 4180 quoting for one CSV field.
std::string csv_field(const std::string& text);

/// Subcommand bodies. Each returns the process exit code and writes
/// human-readable lines to `out` and diagnostics to `err`.
int cmd_run(const std::filesystem::path& spec_path, std::ostream& out, std::ostream& err);
int cmd_compare(const std::filesystem::path& spec_dir, std::size_t jobs, std::ostream& out, std::ostream& err);
int cmd_verify(const std::string& level, const std::optional<std::filesystem::path>& report_path, std::ostream& out,
               std::ostream& err);

struct BenchOptions {
  std::vector<std::size_t> dims{100, 1000, 10000};
  std::vector<std::size_t> steps{15, 30, 75, 150, 300};  // T_z + T_y
  std::size_t m = 10;                                     // upper-level dimension
  std::size_t warmup = 3;
  std::size_t repetitions = 7;
  std::size_t jobs = 1;
  std::optional<std::filesystem::path> output_dir;
};

struct BenchCell {
  std::string method;  // bvfim | cg-fd
  std::size_t n = 0;
  std::size_t T = 0;  // bvfim: T_z + T_y; cg-fd: LL steps
  std::size_t J = 0;
  double wall_us = 0.0;  // median
  OracleCounters calls;  // one hypergradient
};

struct BenchReport {
  std::vector<BenchCell> cells;
  std::vector<std::pair<std::size_t, double>> r2;     // n -> R^2 of bvfim wall vs T
  std::vector<std::pair<std::size_t, double>> ratio;  // n -> bvfim(T=75) / cg-fd wall
  bool second_order_free = true;                      // every bvfim cell made zero hvp/jvp calls
};

/// Times one hypergradient per method on random quadratics of LL
/// dimension n. BVFIM splits T as T_y = T / 3, T_z = T - T_y; CG uses
/// finite-difference Hessian products with T = 100, J = 20.
BenchReport run_bench(const BenchOptions& options);

/// Least-squares line through (t, w); returns R^2.
double linear_fit_r2(const std::vector<double>& t, const std::vector<double>& w);

int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err);

/// Text appended to --help: every config key with type, default and help.
std::string config_reference();

}  // namespace bvfim
