#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bvfim/experiment.hpp"
#include "bvfim/kernels.hpp"

int main(int argc, char** argv) {
  CLI::App app{"bvfim: bilevel optimization via value-function interior-point methods", "bvfim"};
  app.set_version_flag("--version", BVFIM_VERSION);
  app.footer(bvfim::config_reference());
  app.require_subcommand(1);

  std::string spec_path;
  auto* run = app.add_subcommand("run", "Run one experiment from a spec file");
  run->add_option("spec", spec_path, "Spec file")->required();

  std::string spec_dir;
  std::size_t compare_jobs = 1;
  auto* compare = app.add_subcommand("compare", "Run every *.ini in a directory and merge the traces");
  compare->add_option("dir", spec_dir, "Directory of specs")->required();
  compare->add_option("--jobs,-j", compare_jobs, "Parallel workers")->check(CLI::PositiveNumber);

  std::string level = "quick";
  std::string report;
  auto* verify = app.add_subcommand("verify", "Run the numeric theory checks");
  verify->add_option("--level", level, "quick | full")->check(CLI::IsMember({"quick", "full"}));
  verify->add_option("--report", report, "Report path (default <root>/verify-<level>/report.json)");

  bvfim::BenchOptions bench_opts;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Time one hypergradient per method across LL dimensions");
  bench->add_option("--dims", bench_opts.dims, "LL dimensions")->delimiter(',');
  bench->add_option("--steps", bench_opts.steps, "T_z + T_y grid")->delimiter(',');
  bench->add_option("--jobs,-j", bench_opts.jobs, "Parallel workers")->check(CLI::PositiveNumber);
  bench->add_option("--reps", bench_opts.repetitions, "Timed repetitions (median reported)");
  bench->add_option("--out", bench_out, "Output directory (default <root>/bench)");

  CLI11_PARSE(app, argc, argv);

  if (*run) return bvfim::cmd_run(spec_path, std::cout, std::cerr);
  if (*compare) return bvfim::cmd_compare(spec_dir, compare_jobs, std::cout, std::cerr);
  if (*verify) {
    std::optional<std::filesystem::path> path;
    if (!report.empty()) path = report;
    return bvfim::cmd_verify(level, path, std::cout, std::cerr);
  }
  if (*bench) {
    if (!bench_out.empty()) bench_opts.output_dir = bench_out;
    return bvfim::cmd_bench(bench_opts, std::cout, std::cerr);
  }
  return 0;
}
