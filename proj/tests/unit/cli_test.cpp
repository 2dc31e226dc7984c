#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bvfim/experiment.hpp"
#include "bvfim/trace.hpp"

using namespace bvfim;
namespace fs = std::filesystem;

namespace {

// Points BVFIM_OUTPUT_ROOT at a fresh directory for the lifetime of the object.
struct Sandbox {
  fs::path root;
  explicit Sandbox(const std::string& name) : root(fs::temp_directory_path() / ("bvfim-cli-" + name)) {
    fs::remove_all(root);
    fs::create_directories(root / "specs");
    setenv("BVFIM_OUTPUT_ROOT", (root / "out").c_str(), 1);
  }
  ~Sandbox() { unsetenv("BVFIM_OUTPUT_ROOT"); }
  fs::path spec(const std::string& name, const std::string& text) const {
    const fs::path p = root / "specs" / name;
    std::ofstream(p) << text;
    return p;
  }
};

}  // namespace

TEST_CASE("run writes trace, summary and spec under the hash directory") {
  Sandbox box("run");
  const auto path = box.spec("toy.ini", "[problem]\nid = toy(a=0)\n[run]\nK = 500\n");
  std::ostringstream out, err;
  REQUIRE(cmd_run(path, out, err) == 0);
  const std::string hash = spec_hash(load_runspec(path));
  const fs::path dir = box.root / "out" / hash;
  CHECK(fs::exists(dir / "trace.csv"));
  CHECK(fs::exists(dir / "spec.ini"));
  const auto summary = read_report_json(dir / "summary.json");
  CHECK(summary["status"] == "ok");
  CHECK(summary["final"]["dist_x"].get<double>() <= 0.05);
  CHECK(summary["counters"]["hvp"] == 0);
  CHECK(read_trace_csv(dir / "trace.csv").records.size() == 500);
  // Re-running reproduces the same trace apart from wall-clock columns.
  const Trace first = read_trace_csv(dir / "trace.csv");
  REQUIRE(cmd_run(path, out, err) == 0);
  const Trace second = read_trace_csv(dir / "trace.csv");
  CHECK(first.records.back().F == second.records.back().F);
}

TEST_CASE("run with K = 0 succeeds with an empty trace") {
  Sandbox box("k0");
  const auto path = box.spec("k0.ini", "[problem]\nid = toy(a=0)\n[run]\nK = 0\n");
  std::ostringstream out, err;
  CHECK(cmd_run(path, out, err) == 0);
  const auto dir = box.root / "out" / spec_hash(load_runspec(path));
  CHECK(read_trace_csv(dir / "trace.csv").records.empty());
}

TEST_CASE("run exit codes") {
  Sandbox box("codes");
  std::ostringstream out, err;
  CHECK(cmd_run(box.spec("bad.ini", "[problem]\nid = nonexistent()\n"), out, err) == 2);
  CHECK(err.str().find("error [config]") != std::string::npos);
  CHECK(cmd_run(box.root / "missing.ini", out, err) == 5);
  // A run whose objective blows up is a divergence.
  const auto div = box.spec("div.ini",
                            "[problem]\nid = quadratic(n=3, m=2)\n[solver]\noptimizer = gd\nalpha = 1e6\n[run]\nK = 50\n");
  CHECK(cmd_run(div, out, err) == 3);
}

TEST_CASE("compare merges runs into one long CSV") {
  Sandbox box("compare");
  box.spec("a_bvfim.ini", "[problem]\nid = toy(a=0)\n[run]\nK = 20\nx0 = 3\ny0 = 3\n");
  box.spec("b_rhg.ini", "[problem]\nid = toy(a=0)\n[solver]\nid = rhg\n[run]\nK = 20\n");
  box.spec("c_cg.ini", "[problem]\nid = toy(a=2)\n[solver]\nid = cg\n[run]\nK = 20\n");
  std::ostringstream out, err;
  REQUIRE(cmd_compare(box.root / "specs", 2, out, err) == 0);
  fs::path merged;
  for (const auto& e : fs::directory_iterator(box.root / "out"))
    if (e.path().filename().string().rfind("compare-", 0) == 0) merged = e.path() / "merged.csv";
  REQUIRE(fs::exists(merged));
  std::ifstream in(merged);
  std::string line;
  std::getline(in, line);
  CHECK(line == "solver,init,step,metric,value");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3 * 20 * 4);
  // Same inputs, same bytes, whatever the worker count.
  std::ifstream again(merged);
  const std::string before((std::istreambuf_iterator<char>(again)), {});
  REQUIRE(cmd_compare(box.root / "specs", 1, out, err) == 0);
  std::ifstream after_in(merged);
  const std::string after((std::istreambuf_iterator<char>(after_in)), {});
  CHECK(before == after);
}

TEST_CASE("compare rejects mixed problem families") {
  Sandbox box("mixed");
  box.spec("a.ini", "[problem]\nid = toy(a=0)\n[run]\nK = 2\n");
  box.spec("b.ini", "[problem]\nid = quadratic(n=2, m=2)\n[run]\nK = 2\n");
  std::ostringstream out, err;
  CHECK(cmd_compare(box.root / "specs", 1, out, err) == 2);
  CHECK(err.str().find("differs") != std::string::npos);
}

TEST_CASE("single-spec compare is a degenerate merge") {
  Sandbox box("single");
  box.spec("only.ini", "[problem]\nid = toy(a=0)\n[run]\nK = 3\n");
  std::ostringstream out, err;
  CHECK(cmd_compare(box.root / "specs", 4, out, err) == 0);
}

TEST_CASE("csv_field quotes only when needed") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("config reference lists every key") {
  const std::string ref = config_reference();
  for (const KeyInfo& k : runspec_keys()) {
    CAPTURE(k.key);
    CHECK(ref.find("    " + k.key + " (") != std::string::npos);
  }
  CHECK(ref.find("BVFIM_OUTPUT_ROOT") != std::string::npos);
}

TEST_CASE("linear fit R^2") {
  CHECK(linear_fit_r2({1, 2, 3, 4}, {2, 4, 6, 8}) == doctest::Approx(1.0));
  CHECK(linear_fit_r2({1, 2, 3, 4}, {1, -1, 1, -1}) < 0.3);
}

TEST_CASE("bench reports zero second-order calls for every BVFIM cell") {
  BenchOptions opt;
  opt.dims = {50};
  opt.steps = {6, 12, 24};
  opt.warmup = 0;
  opt.repetitions = 1;
  const BenchReport r = run_bench(opt);
  CHECK(r.second_order_free);
  CHECK(r.cells.size() == 4);
  for (const BenchCell& c : r.cells) {
    if (c.method == "bvfim") CHECK(c.calls.second_order() == 0);
    else CHECK(c.calls.second_order() > 0);
  }
}

TEST_CASE("verify quick exits zero and writes a report") {
  Sandbox box("verify");
  std::ostringstream out, err;
  const fs::path report = box.root / "report.json";
  CHECK(cmd_verify("quick", report, out, err) == 0);
  CHECK(read_report_json(report)["passed"] == true);
  CHECK(cmd_verify("medium", std::nullopt, out, err) == 2);
}
