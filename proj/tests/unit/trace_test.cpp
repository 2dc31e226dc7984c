#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "bvfim/error.hpp"
#include "bvfim/trace.hpp"

using namespace bvfim;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("bvfim-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0, 2.5}) CHECK(parse_double(format_double(v)) == v);
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(std::isinf(parse_double(format_double(-INFINITY))));
  CHECK(std::isnan(parse_double("nan")));
  CHECK_THROWS(parse_double("1.5x"));
}

TEST_CASE("trace CSV round-trip") {
  Trace t;
  for (std::size_t i = 0; i < 3; ++i) {
    TraceRecord r;
    r.k = i;
    r.step = i + 1;
    r.F = 1.0 / (i + 3.0);
    r.f = -0.1 * i;
    r.f_reg = i == 1 ? std::numeric_limits<double>::quiet_NaN() : 0.7;
    r.grad_norm = 1e-17 * i;
    r.dist_x = std::numeric_limits<double>::quiet_NaN();
    r.wall_ms = 3.25;
    r.calls.grad_f_y = 75 * (i + 1);
    r.calls.hvp = i;
    t.records.push_back(r);
  }
  const auto path = temp_dir("csv") / "trace.csv";
  write_trace_csv(t, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == kTraceCsvHeader);
  const Trace back = read_trace_csv(path);
  REQUIRE(back.records.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.records[i].step == t.records[i].step);
    CHECK(back.records[i].F == t.records[i].F);
    CHECK(back.records[i].grad_norm == t.records[i].grad_norm);
    CHECK(back.records[i].calls.grad_f_y == t.records[i].calls.grad_f_y);
    CHECK(back.records[i].calls.hvp == t.records[i].calls.hvp);
    CHECK(std::isnan(back.records[i].dist_x));
  }
  CHECK(std::isnan(back.records[1].f_reg));
}

TEST_CASE("reading a malformed trace is an I/O error") {
  const auto dir = temp_dir("bad");
  std::ofstream(dir / "bad.csv") << "k,l\n1,2\n";
  CHECK_THROWS_AS(read_trace_csv(dir / "bad.csv"), Error);
  CHECK_THROWS_AS(read_trace_csv(dir / "missing.csv"), Error);
}

TEST_CASE("report JSON round-trip adds version and platform") {
  const auto path = temp_dir("json") / "r.json";
  write_report_json({{"b", 1.5}, {"a", {1, 2}}}, path);
  const auto back = read_report_json(path);
  CHECK(back["b"] == 1.5);
  CHECK(back["a"][1] == 2);
  CHECK(back["library_version"] == library_version());
  CHECK(back["platform"] == platform_string());
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}
