#include "bvfim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "bvfim/error.hpp"
#include "bvfim/kernels.hpp"
#include "bvfim/trace.hpp"
#include "bvfim/verify.hpp"

namespace bvfim {
namespace {

using nlohmann::json;

json counters_json(const OracleCounters& c) {
  return {{"eval_F", c.eval_F},     {"eval_f", c.eval_f}, {"grad_F_x", c.grad_F_x},
          {"grad_F_y", c.grad_F_y}, {"grad_f_x", c.grad_f_x}, {"grad_f_y", c.grad_f_y},
          {"hvp", c.hvp},           {"jvp", c.jvp},       {"second_order_fd", c.second_order_fd}};
}

// JSON has no NaN; unknown quantities become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json head(VecView v) {
  const std::size_t keep = v.size() <= 64 ? v.size() : 8;
  json out = json::array();
  for (std::size_t i = 0; i < keep; ++i) out.push_back(number(v[i]));
  return out;
}

BaselineMethod baseline_method(SolverKind kind) {
  switch (kind) {
    case SolverKind::Rhg: return BaselineMethod::Rhg;
    case SolverKind::Trhg: return BaselineMethod::Trhg;
    case SolverKind::Cg: return BaselineMethod::Cg;
    case SolverKind::Neumann: return BaselineMethod::Neumann;
    case SolverKind::Bvfim: break;
  }
  throw Error(ErrorKind::Config, "bvfim is not a baseline");
}

json build_summary(const Experiment& e, const BuiltProblem& built, double wall_ms) {
  const RunResult& r = e.result;
  const Problem& p = built.problem;
  json s;
  s["spec_hash"] = e.hash;
  s["problem"] = e.spec.problem.to_string();
  s["solver"] = to_string(e.spec.solver);
  s["status"] = e.error ? "error" : "ok";
  if (e.error) s["error"] = {{"kind", to_string(e.error->kind())}, {"message", e.error->what()}};
  s["K"] = e.spec.bvfim.K;
  s["L"] = e.spec.solver == SolverKind::Bvfim ? e.spec.bvfim.L : 1;
  s["records"] = r.trace.records.size();
  s["curvature_warnings"] = r.trace.curvature_warnings;
  s["infeasible_restarts"] = r.trace.infeasible_restarts;
  s["counters"] = counters_json(r.counters);
  s["wall_ms"] = wall_ms;

  json fin;
  if (!r.x.empty() && !r.y.empty()) {
    fin["x"] = head(r.x);
    fin["x_norm"] = kernels::norm2(r.x);
    fin["y_norm"] = kernels::norm2(r.y);
    fin["F"] = number(p.eval_F(r.x, r.y));
    fin["f"] = number(p.eval_f(r.x, r.y));
    double dist_x = std::numeric_limits<double>::quiet_NaN();
    if (p.known_optimum) {
      Vec d = r.x;
      kernels::axpy(-1.0, p.known_optimum->x, d);
      dist_x = kernels::norm2(d);
      Vec dy = r.y;
      kernels::axpy(-1.0, p.known_optimum->y, dy);
      fin["dist_y_star"] = kernels::norm2(dy);
      fin["F_star"] = p.known_optimum->F;
    }
    fin["dist_x"] = number(dist_x);
    fin["dist_y"] = number(ll_distance(p, r.x, r.y));
  } else if (!r.trace.records.empty()) {
    const TraceRecord& last = r.trace.records.back();
    fin["x"] = head(last.x);
    fin["F"] = number(last.F);
    fin["f"] = number(last.f);
    fin["dist_x"] = number(last.dist_x);
    fin["dist_y"] = number(last.dist_y);
  }
  s["final"] = fin;

  if (built.hyperclean && !r.x.empty()) {
    const HyperCleanProblem& hc = *built.hyperclean;
    const DetectionScore d = detection_f1(r.x, hc.corrupted);
    s["hyperclean"] = {{"val_accuracy", hc.accuracy(r.y, *hc.val)},
                       {"test_accuracy", hc.accuracy(r.y, *hc.test)},
                       {"detection", {{"precision", d.precision}, {"recall", d.recall}, {"f1", d.f1}}}};
  }
  return s;
}

std::string label_of(const RunSpec& spec) {
  auto list = [](const std::optional<Vec>& v) {
    if (!v) return std::string("default");
    std::string out = "(";
    for (std::size_t i = 0; i < v->size(); ++i) out += (i ? "," : "") + format_double((*v)[i]);
    return out + ")";
  };
  return spec.problem.to_string() + " x0=" + list(spec.x0) + " y0=" + list(spec.y0);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
}

int report_error(const Error& e, std::ostream& err) {
  err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
  return exit_code(e.kind());
}

}  // namespace

Experiment execute(const RunSpec& spec) {
  Experiment e;
  e.spec = spec;
  e.hash = spec_hash(spec);
  const BuiltProblem built = build_problem(spec);
  const auto started = std::chrono::steady_clock::now();
  try {
    if (spec.solver == SolverKind::Bvfim) {
      e.result = run(built.problem, spec.schedule, spec.bvfim, built.x0, built.y0);
    } else {
      BaselineConfig cfg = spec.baseline;
      cfg.method = baseline_method(spec.solver);
      e.result = run_baseline(built.problem, cfg, built.x0, built.y0);
    }
  } catch (const RunError& err) {
    if (err.kind() == ErrorKind::Config || err.kind() == ErrorKind::Capability) throw Error(err.kind(), err.what());
    e.error = Error(err.kind(), err.what());
    e.result.trace = err.partial_trace();
    e.result.counters = err.counters();
  }
  const double wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  e.summary = build_summary(e, built, wall_ms);
  return e;
}

std::filesystem::path output_root(const RunSpec& spec) {
  if (const char* env = std::getenv("BVFIM_OUTPUT_ROOT"); env && *env) return env;
  return spec.output_dir;
}

std::filesystem::path write_experiment(const Experiment& e) {
  const auto dir = output_root(e.spec) / e.hash;
  ensure_dir(dir);
  write_trace_csv(e.result.trace, dir / "trace.csv");
  json summary = e.summary;
  write_report_json(summary, dir / "summary.json");
  write_text(dir / "spec.ini", canonical_text(e.spec));
  return dir;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

int cmd_run(const std::filesystem::path& spec_path, std::ostream& out, std::ostream& err) {
  try {
    const RunSpec spec = load_runspec(spec_path);
    const Experiment e = execute(spec);
    const auto dir = write_experiment(e);
    out << "run " << e.hash << " " << to_string(spec.solver) << " on " << spec.problem.to_string() << "\n";
    out << "  records: " << e.result.trace.records.size() << "\n";
    if (e.summary["final"].contains("F")) out << "  final F: " << e.summary["final"]["F"].dump() << "\n";
    if (e.summary["final"].contains("dist_x")) out << "  final dist_x: " << e.summary["final"]["dist_x"].dump() << "\n";
    out << "  output: " << dir.string() << "\n";
    if (e.error) return report_error(*e.error, err);
    return 0;
  } catch (const Error& e) {
    return report_error(e, err);
  } catch (const std::exception& e) {
    err << "error [io]: " << e.what() << "\n";
    return 5;
  }
}

int cmd_compare(const std::filesystem::path& spec_dir, std::size_t jobs, std::ostream& out, std::ostream& err) {
  try {
    if (!std::filesystem::is_directory(spec_dir))
      throw Error(ErrorKind::Io, "not a directory: " + spec_dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(spec_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".ini") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorKind::Config, "no .ini specs in " + spec_dir.string());

    std::vector<RunSpec> specs;
    for (const auto& f : files) specs.push_back(load_runspec(f));
    for (std::size_t i = 1; i < specs.size(); ++i)
      if (specs[i].problem.family != specs[0].problem.family)
        throw Error(ErrorKind::Config, files[i].string() + ": problem family '" + specs[i].problem.family +
                                           "' differs from '" + specs[0].problem.family + "' in " + files[0].string());

    std::vector<std::optional<Experiment>> results(specs.size());
    std::vector<std::optional<Error>> failures(specs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < specs.size(); i = next++) {
        try {
          results[i] = execute(specs[i]);
          write_experiment(*results[i]);
        } catch (const Error& e) {
          failures[i] = e;
        }
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < std::max<std::size_t>(jobs, 1); ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::string combined;
    for (const auto& s : specs) combined += spec_hash(s);
    const auto dir = output_root(specs[0]) / ("compare-" + fnv1a_hex(combined));
    ensure_dir(dir);
    std::ofstream csv(dir / "merged.csv", std::ios::binary);
    if (!csv) throw Error(ErrorKind::Io, "cannot write " + (dir / "merged.csv").string());
    csv << "solver,init,step,metric,value\n";
    int code = 0;
    json members = json::array();
    for (std::size_t i = 0; i < specs.size(); ++i) {
      json m = {{"spec", files[i].filename().string()}};
      if (failures[i]) {
        m["status"] = "error";
        m["error"] = failures[i]->what();
        members.push_back(m);
        err << files[i].filename().string() << ": ";
        if (!code) code = report_error(*failures[i], err);
        else report_error(*failures[i], err);
        continue;
      }
      const Experiment& e = *results[i];
      m["hash"] = e.hash;
      m["status"] = e.error ? "error" : "ok";
      m["final"] = e.summary["final"];
      members.push_back(m);
      const std::string solver = csv_field(to_string(e.spec.solver));
      const std::string init = csv_field(label_of(e.spec));
      for (const TraceRecord& r : e.result.trace.records) {
        const std::string prefix = solver + "," + init + "," + std::to_string(r.step) + ",";
        csv << prefix << "F," << format_double(r.F) << "\n";
        csv << prefix << "f," << format_double(r.f) << "\n";
        csv << prefix << "dist_x," << format_double(r.dist_x) << "\n";
        csv << prefix << "dist_y," << format_double(r.dist_y) << "\n";
      }
      out << files[i].filename().string() << ": " << to_string(e.spec.solver) << " " << label_of(e.spec)
          << " final F " << e.summary["final"].value("F", json(nullptr)).dump() << "\n";
      if (e.error) {
        err << files[i].filename().string() << ": ";
        const int c = report_error(*e.error, err);
        if (!code) code = c;
      }
    }
    csv.close();
    write_report_json({{"members", members}, {"merged_csv", "merged.csv"}}, dir / "compare.json");
    out << "merged: " << (dir / "merged.csv").string() << "\n";
    return code;
  } catch (const Error& e) {
    return report_error(e, err);
  }
}

int cmd_verify(const std::string& level, const std::optional<std::filesystem::path>& report_path, std::ostream& out,
               std::ostream& err) {
  try {
    const json report = verify::run_suite(verify::parse_level(level));
    for (const auto& c : report["checks"])
      out << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << c["id"].get<std::string>() << "\n";
    std::filesystem::path path;
    if (report_path) {
      path = *report_path;
    } else {
      const char* env = std::getenv("BVFIM_OUTPUT_ROOT");
      path = std::filesystem::path(env && *env ? env : "runs") / ("verify-" + level) / "report.json";
    }
    if (path.has_parent_path()) ensure_dir(path.parent_path());
    write_report_json(report, path);
    out << "report: " << path.string() << "\n";
    if (!report["passed"].get<bool>()) {
      std::string ids;
      for (const auto& id : report["failed"]) ids += (ids.empty() ? "" : ", ") + id.get<std::string>();
      err << "error [verification]: failed checks: " << ids << "\n";
      return exit_code(ErrorKind::Verification);
    }
    return 0;
  } catch (const Error& e) {
    return report_error(e, err);
  }
}

double linear_fit_r2(const std::vector<double>& t, const std::vector<double>& w) {
  const double n = static_cast<double>(t.size());
  double mt = 0.0, mw = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    mw += w[i];
  }
  mt /= n;
  mw /= n;
  double stw = 0.0, stt = 0.0, sww = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stw += (t[i] - mt) * (w[i] - mw);
    stt += (t[i] - mt) * (t[i] - mt);
    sww += (w[i] - mw) * (w[i] - mw);
  }
  if (stt == 0.0 || sww == 0.0) return 0.0;
  return stw * stw / (stt * sww);
}

namespace {

template <class Fn>
double median_wall_us(Fn&& fn, std::size_t warmup, std::size_t reps) {
  for (std::size_t i = 0; i < warmup; ++i) fn();
  std::vector<double> times;
  for (std::size_t i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    times.push_back(std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

std::vector<BenchCell> bench_dimension(std::size_t n, const BenchOptions& opt) {
  std::vector<BenchCell> cells;
  const QuadraticProblem q = make_random_quadratic(n, opt.m, 1000 + n);
  const Problem fd = with_fd_second_order(q.problem);
  const Vec x(opt.m, 0.5);
  const Vec y0(n, 0.0);
  const Regularization reg{1.0, 1.0, 1.0, 1.0};

  for (std::size_t T : opt.steps) {
    SolverConfig cfg;
    cfg.T_y = std::max<std::size_t>(1, T / 3);
    cfg.T_z = std::max<std::size_t>(1, T - cfg.T_y);
    BenchCell cell{"bvfim", n, cfg.T_z + cfg.T_y, 0, 0.0, {}};
    auto once = [&](OracleCounters& c) {
      Oracles o(q.problem, c);
      const ZSolve z = solve_z(o, x, reg.mu1, reg.mu2, y0, cfg.T_z, cfg.s1);
      const YSolve y = solve_y(o, x, z.f_reg, reg.theta, reg.tau, z.z, cfg);
      return hyper_gradient(o, x, y.y, z.z, z.f_reg, reg.tau, y.f);
    };
    once(cell.calls);
    cell.wall_us = median_wall_us(
        [&] {
          OracleCounters c;
          once(c);
        },
        opt.warmup, opt.repetitions);
    cells.push_back(cell);
  }

  ImplicitConfig icfg;
  icfg.method = ImplicitMethod::Cg;
  icfg.s = 0.5;
  BenchCell cell{"cg-fd", n, icfg.T, icfg.J, 0.0, {}};
  auto once = [&](OracleCounters& c) {
    Oracles o(fd, c);
    return implicit_hypergradient(o, x, y0, icfg);
  };
  once(cell.calls);
  cell.wall_us = median_wall_us(
      [&] {
        OracleCounters c;
        once(c);
      },
      opt.warmup, opt.repetitions);
  cells.push_back(cell);
  return cells;
}

}  // namespace

BenchReport run_bench(const BenchOptions& options) {
  if (options.dims.empty() || options.steps.size() < 2)
    throw Error(ErrorKind::Config, "bench: need at least one dimension and two step counts");
  if (options.repetitions == 0) throw Error(ErrorKind::Config, "bench: repetitions must be positive");
  std::vector<std::vector<BenchCell>> per_dim(options.dims.size());
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::optional<Error> failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < options.dims.size(); i = next++) {
      try {
        per_dim[i] = bench_dimension(options.dims[i], options);
      } catch (const Error& e) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = e;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < std::max<std::size_t>(options.jobs, 1); ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) throw *failure;

  BenchReport report;
  for (std::size_t i = 0; i < options.dims.size(); ++i) {
    std::vector<double> t, w;
    double bvfim_default = std::numeric_limits<double>::quiet_NaN();
    double cg = std::numeric_limits<double>::quiet_NaN();
    for (const BenchCell& c : per_dim[i]) {
      report.cells.push_back(c);
      if (c.method == "bvfim") {
        t.push_back(static_cast<double>(c.T));
        w.push_back(c.wall_us);
        if (c.T == 75) bvfim_default = c.wall_us;
        if (c.calls.second_order() != 0) report.second_order_free = false;
      } else {
        cg = c.wall_us;
      }
    }
    if (std::isnan(bvfim_default)) {
      // Interpolate the Appendix C budget T_z + T_y = 75 from the fit.
      const double n = static_cast<double>(t.size());
      double mt = 0, mw = 0, stw = 0, stt = 0;
      for (std::size_t k = 0; k < t.size(); ++k) mt += t[k] / n, mw += w[k] / n;
      for (std::size_t k = 0; k < t.size(); ++k) stw += (t[k] - mt) * (w[k] - mw), stt += (t[k] - mt) * (t[k] - mt);
      bvfim_default = mw + stw / stt * (75.0 - mt);
    }
    report.r2.emplace_back(options.dims[i], linear_fit_r2(t, w));
    report.ratio.emplace_back(options.dims[i], bvfim_default / cg);
  }
  return report;
}

int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const BenchReport r = run_bench(options);
    std::filesystem::path dir;
    if (options.output_dir) {
      dir = *options.output_dir;
    } else {
      const char* env = std::getenv("BVFIM_OUTPUT_ROOT");
      dir = std::filesystem::path(env && *env ? env : "runs") / "bench";
    }
    ensure_dir(dir);
    std::ofstream csv(dir / "bench.csv", std::ios::binary);
    if (!csv) throw Error(ErrorKind::Io, "cannot write " + (dir / "bench.csv").string());
    csv << "method,n,T,J,wall_us,calls_eval_F,calls_eval_f,calls_gFx,calls_gFy,calls_gfx,calls_gfy,calls_hvp,"
           "calls_jvp\n";
    for (const BenchCell& c : r.cells) {
      csv << c.method << "," << c.n << "," << c.T << "," << c.J << "," << format_double(c.wall_us) << ","
          << c.calls.eval_F << "," << c.calls.eval_f << "," << c.calls.grad_F_x << "," << c.calls.grad_F_y << ","
          << c.calls.grad_f_x << "," << c.calls.grad_f_y << "," << c.calls.hvp << "," << c.calls.jvp << "\n";
    }
    json fit = json::array();
    for (std::size_t i = 0; i < r.r2.size(); ++i) {
      fit.push_back({{"n", r.r2[i].first}, {"r2", r.r2[i].second}, {"bvfim_over_cg_fd", r.ratio[i].second}});
      out << "n=" << r.r2[i].first << "  R^2(bvfim wall vs T_z+T_y)=" << format_double(r.r2[i].second)
          << "  bvfim/cg-fd=" << format_double(r.ratio[i].second) << "\n";
    }
    write_report_json({{"fits", fit}, {"second_order_free", r.second_order_free}}, dir / "bench.json");
    out << "csv: " << (dir / "bench.csv").string() << "\n";
    return 0;
  } catch (const Error& e) {
    return report_error(e, err);
  }
}

std::string config_reference() {
  std::string out = "Config keys (sectioned key = value file; '#' starts a comment):\n";
  std::string section = "\x01";
  for (const KeyInfo& k : runspec_keys()) {
    if (k.section != section) {
      section = k.section;
      out += section.empty() ? "  (top level)\n" : "  [" + section + "]\n";
    }
    out += "    " + k.key + " (" + k.type + ", default " + k.default_value + ")\n        " + k.help + "\n";
  }
  out += "Environment:\n    BVFIM_OUTPUT_ROOT  overrides the output root of every command\n"
         "    BVFIM_ISA          forces the vector kernels: scalar | avx2 | neon\n"
         "Exit codes: 0 ok, 2 config, 3 solver divergence, 4 verification failure, 5 I/O\n";
  return out;
}

}  // namespace bvfim
