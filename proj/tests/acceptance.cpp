// Acceptance run: one PASS/FAIL line per criterion, diagnostics indented
// underneath. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "bvfim/baselines.hpp"
#include "bvfim/bvfim.hpp"
#include "bvfim/experiment.hpp"
#include "bvfim/problems.hpp"
#include "bvfim/rng.hpp"
#include "bvfim/verify.hpp"

using namespace bvfim;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool passed = false;
  std::string summary;
  std::vector<std::string> notes;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double dist(VecView a, VecView b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Grid argmin over x in [-2, 4] of the stage-k barrier value function.
double phi_k_argmin(const Problem& toy, std::size_t k) {
  const verify::GridSpec gx{{-2.0}, {4.0}, 121};
  const verify::GridSpec gy{{-8.0}, {8.0}, 4001};
  const Regularization reg = Schedule{}.at(k);
  double best = INFINITY, arg = NAN;
  for (std::size_t i = 0; i < gx.size(); ++i) {
    const Vec x = gx.point(i);
    if (auto v = verify::phi_k_global(toy, x, reg, gy); v && *v < best) best = *v, arg = x[0];
  }
  return arg;
}

Outcome toy_global(double a, double target, std::optional<double> f_star) {
  Outcome out;
  out.passed = true;
  const Problem toy = make_toy(a);
  const SolverConfig cfg;  // T_z = 50, T_y = 25, L = 1, K = 500, steps 0.01, Adam
  const Schedule schedule;  // (1, 1, 1, 1) / 1.01^k
  std::string parts;
  for (double start : {0.0, 3.0}) {
    const auto t0 = std::chrono::steady_clock::now();
    const RunResult r = run(toy, schedule, cfg, Vec{start}, Vec{start});
    const double secs = seconds_since(t0);
    const double dx = std::abs(r.x[0] - target), dy = std::abs(r.y[0] - target);
    const double F = toy.eval_F(r.x, r.y);
    bool ok = dx <= 0.05 && dy <= 0.05 && secs <= 10.0;
    if (f_star) ok = ok && std::abs(F - *f_star) <= 0.01;
    out.passed = out.passed && ok;
    parts += fmt(" (%g,%g): |dx|=%.4f |dy|=%.4f F=%.4f %.2fs;", start, start, dx, dy, F, secs);
  }
  out.summary = parts;
  const double arg = phi_k_argmin(toy, cfg.K - 1);
  out.notes.push_back(fmt("grid argmin of phi_%zu over x in [-2, 4]: %.3f (target %.4f, gap %.3f)", cfg.K - 1, arg,
                          target, std::abs(arg - target)));
  return out;
}

Outcome baseline_failure() {
  Outcome out;
  out.passed = true;
  const Problem toy = make_toy(0.0);
  const double f_star = 2.0 * (kPi / 4.0) * (kPi / 4.0);
  for (BaselineMethod m : {BaselineMethod::Rhg, BaselineMethod::Cg}) {
    BaselineConfig cfg;
    cfg.method = m;
    cfg.unroll.T = 100;
    cfg.implicit.T = 100;
    cfg.implicit.J = 20;
    const double far = run_baseline(toy, cfg, Vec{3.0}, Vec{3.0}).trace.records.back().F;
    const double near = run_baseline(toy, cfg, Vec{0.0}, Vec{0.0}).trace.records.back().F;
    const bool ok = far >= f_star + 0.1 && std::abs(near - f_star) <= 0.05;
    out.passed = out.passed && ok;
    out.summary += fmt(" %s F(3,3)=%.4f F(0,0)=%.4f;", to_string(m).c_str(), far, near);
  }
  out.summary += fmt(" F*=%.4f", f_star);
  return out;
}

Outcome proposition1() {
  const auto t0 = std::chrono::steady_clock::now();
  const Regularization reg{1.0, 0.5, 1.0, 0.5};
  std::vector<Vec> xs;
  for (int i = 0; i < 20; ++i) xs.push_back({-2.0 + 6.0 * i / 19.0});
  const auto toy = verify::check_proposition1(make_toy(0.0), reg, xs, Vec{0.0});
  const QuadraticProblem q = make_random_quadratic(3, 2, 11);
  Rng rng(7);
  std::vector<Vec> xq;
  for (int i = 0; i < 20; ++i) xq.push_back({rng.normal(), rng.normal()});
  const auto quad = verify::check_proposition1(q.problem, reg, xq, Vec(3, 0.0));
  const double secs = seconds_since(t0);
  return {toy.max_rel_error <= 1e-4 && quad.max_rel_error <= 1e-4 && toy.points.size() == 20 &&
              quad.points.size() == 20 && secs <= 60.0,
          fmt(" max rel err toy %.2e, quadratic %.2e; %.2fs", toy.max_rel_error, quad.max_rel_error, secs),
          {}};
}

Outcome analytic_equivalence() {
  const QuadraticProblem q = make_random_quadratic(5, 3, 7);
  const Vec target = q.argmin_phi();
  const Vec x0(3, 0.0), y0(5, 0.0);

  BaselineConfig b;
  b.optimizer = OuterOptimizer::Gd;
  b.alpha = 0.5;
  b.method = BaselineMethod::Rhg;
  b.unroll.T = 2000;
  b.unroll.s = 0.5;
  const double rhg = dist(run_baseline(q.problem, b, x0, y0).x, target);
  b.method = BaselineMethod::Cg;
  b.implicit.T = 2000;
  b.implicit.s = 0.5;
  b.implicit.J = 5;  // n = 5: exact in exact arithmetic
  const double cg = dist(run_baseline(q.problem, b, x0, y0).x, target);

  Schedule one;
  one.mode = ScheduleMode::Fixed;
  one.base = {1e-6, 1e-6, 1e-6, 1e-6};
  SolverConfig c;
  c.K = 1;
  c.L = 500;
  c.T_z = 200;
  c.T_y = 1000;
  c.s1 = 0.5;
  c.s2 = 0.01;
  c.optimizer = OuterOptimizer::Gd;
  c.alpha = 0.5;
  c.warm_start_y = true;
  const double bv = dist(run(q.problem, one, c, x0, y0).x, target);
  return {rhg <= 1e-3 && cg <= 1e-3 && bv <= 1e-3, fmt(" |x - x*|: rhg %.2e, cg %.2e, bvfim %.2e", rhg, cg, bv), {}};
}

Outcome theory_suite() {
  const nlohmann::json r = verify::run_suite(verify::Level::Full);
  Outcome out;
  out.passed = r["seconds"].get<double>() <= 600.0;
  const char* wanted[] = {"sandwich", "lemma1_toy", "lemma1_quadratic", "relaxation", "epiconvergence", "schedule"};
  for (const char* id : wanted) {
    bool found = false;
    for (const auto& c : r["checks"]) {
      if (c["id"] != id) continue;
      found = true;
      const bool ok = c["passed"].get<bool>();
      out.passed = out.passed && ok;
      out.summary += fmt(" %s=%s", id, ok ? "ok" : "FAIL");
      if (c.contains("stages"))
        for (const auto& s : c["stages"])
          out.notes.push_back(fmt("epi k=%zu: upper gap %.3e, tau ln mu2 %.3e, argmin x %.3f", s["k"].get<std::size_t>(),
                                  s["upper_gap"].get<double>(), s["tau_ln_mu2"].get<double>(),
                                  s["argmin_x"].get<double>()));
    }
    if (!found) out.passed = false;
  }
  out.summary += fmt("; %.1fs", r["seconds"].get<double>());
  return out;
}

Outcome first_order_only() {
  Outcome out;
  Problem toy = make_toy(0.0);
  toy.hvp_f_yy = nullptr;
  toy.jvp_f_xy = nullptr;
  const SolverConfig cfg;
  const Regularization reg = Schedule{}.at(0);

  // One iteration, oracle by oracle.
  OracleCounters c;
  Oracles o(toy, c);
  const Vec x{3.0};
  OracleCounters before = c;
  const ZSolve z = solve_z(o, x, reg.mu1, reg.mu2, Vec{3.0}, cfg.T_z, cfg.s1);
  const OracleCounters dz = c - before;
  before = c;
  const YSolve y = solve_y(o, x, z.f_reg, reg.theta, reg.tau, z.z, cfg);
  const OracleCounters dy = c - before;
  before = c;
  (void)hyper_gradient(o, x, y.y, z.z, z.f_reg, reg.tau, y.f);
  const OracleCounters dg = c - before;

  OracleCounters pz;
  pz.grad_f_y = cfg.T_z;
  pz.eval_f = 1;
  OracleCounters py;
  py.grad_F_y = cfg.T_y;
  py.grad_f_y = cfg.T_y;
  py.eval_f = 1 + y.accepted + y.halvings;
  py.eval_F = 1 + y.accepted + y.halvings - y.infeasible_trials;
  OracleCounters pg;
  pg.grad_F_x = 1;
  pg.grad_f_x = 2;
  const bool ledger = dz == pz && dy == py && dg == pg && y.accepted == cfg.T_y;

  const RunResult r = run(toy, Schedule{}, cfg, Vec{3.0}, Vec{3.0});
  bool zero = r.counters.second_order() == 0;
  for (const auto& rec : r.trace.records) zero = zero && rec.calls.second_order() == 0;
  const bool complete = r.trace.records.size() == cfg.K;

  int refused = 0;
  for (BaselineMethod m : {BaselineMethod::Rhg, BaselineMethod::Cg}) {
    BaselineConfig b;
    b.method = m;
    try {
      run_baseline(toy, b, Vec{3.0}, Vec{3.0});
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Capability) ++refused;
    }
  }
  out.passed = ledger && zero && complete && refused == 2;
  out.summary = fmt(" ledger %s (halvings %zu, infeasible %zu), second-order calls %llu, records %zu/%zu, "
                    "capability errors %d/2",
                    ledger ? "exact" : "MISMATCH", y.halvings, y.infeasible_trials,
                    static_cast<unsigned long long>(r.counters.second_order()), r.trace.records.size(), cfg.K, refused);
  return out;
}

// Validation accuracy after fitting the lower level to convergence under weights sigmoid(x).
double fitted_val_accuracy(const HyperCleanProblem& hc, VecView x, VecView y0) {
  const Problem& p = hc.problem;
  const auto fit = verify::minimize_local([&](VecView y) { return p.eval_f(x, y); },
                                          [&](VecView y) { return p.grad_f_y(x, y); }, y0, 1e-6, 20000);
  return hc.accuracy(fit.y, *hc.val);
}

Outcome hyper_cleaning() {
  const auto t0 = std::chrono::steady_clock::now();
  double gain = 0.0, f1 = 0.0, base_acc = 0.0, acc = 0.0;
  Outcome out;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    HyperCleanOptions opt;  // d = 20, 3 classes, n_tr = n_val = 300, half the labels corrupted
    opt.seed = seed;
    const HyperCleanProblem hc = make_hyperclean(opt);
    const Vec x0(opt.n_tr, 0.0);
    const Vec y0 = hc.initial_y(seed);
    SolverConfig cfg;
    cfg.K = 300;
    cfg.alpha = 0.1;
    cfg.s1 = cfg.s2 = 1e-3;
    cfg.warm_start_y = true;
    const RunResult r = run(hc.problem, Schedule{}, cfg, x0, y0);
    const double b = fitted_val_accuracy(hc, x0, y0);
    const double v = fitted_val_accuracy(hc, r.x, y0);
    const double d = detection_f1(r.x, hc.corrupted).f1;
    out.notes.push_back(fmt("seed %llu: uniform %.3f, learned %.3f, F1 %.3f", static_cast<unsigned long long>(seed),
                            b, v, d));
    base_acc += b / 5;
    acc += v / 5;
    gain += 100.0 * (v - b) / 5;
    f1 += d / 5;
  }
  const double secs = seconds_since(t0);
  out.passed = gain >= 5.0 && f1 >= 0.8 && secs <= 300.0;
  out.summary = fmt(" mean val acc %.3f vs uniform %.3f (+%.1f points), mean F1 %.3f; %.1fs", acc, base_acc, gain, f1,
                    secs);
  return out;
}

Outcome complexity() {
  const BenchReport r = run_bench(BenchOptions{});
  Outcome out;
  double r2_1000 = NAN;
  for (const auto& [n, v] : r.r2)
    if (n == 1000) r2_1000 = v;
  bool decreasing = true;
  for (std::size_t i = 1; i < r.ratio.size(); ++i) decreasing = decreasing && r.ratio[i].second < r.ratio[i - 1].second;
  out.passed = r2_1000 >= 0.9 && decreasing && r.second_order_free;
  out.summary = fmt(" R^2(n=1000)=%.4f; bvfim/cg-fd ratio", r2_1000);
  for (const auto& [n, v] : r.ratio) out.summary += fmt(" n=%zu:%.3f", n, v);
  out.summary += decreasing ? " (decreasing)" : " (not decreasing)";
  for (const BenchCell& c : r.cells)
    if (c.T == 75 || c.method == "cg-fd")
      out.notes.push_back(fmt("%s n=%zu: %.0f us, %llu first-order calls, %llu second-order calls", c.method.c_str(), c.n,
                              c.wall_us, static_cast<unsigned long long>(c.calls.first_order()),
                              static_cast<unsigned long long>(c.calls.second_order())));
  return out;
}

}  // namespace

int main() {
  const double f_star_a2 = 2.0 * std::pow(3.0 * kPi / 4.0 - 2.0, 2);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 toy global convergence a=0", [] { return toy_global(0.0, -kPi / 4.0, std::nullopt); }},
      {"2 toy global convergence a=2", [&] { return toy_global(2.0, 3.0 * kPi / 4.0, f_star_a2); }},
      {"3 baseline failure from (3,3)", baseline_failure},
      {"4 hypergradient vs finite differences", proposition1},
      {"5 analytic-oracle equivalence", analytic_equivalence},
      {"6 theory suite", theory_suite},
      {"7 first-order-only contract", first_order_only},
      {"8 synthetic hyper-cleaning", hyper_cleaning},
      {"9 complexity scaling", complexity},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string(" threw: ") + e.what(), {}};
    }
    std::printf("%s %s:%s\n", o.passed ? "PASS" : "FAIL", name, o.summary.c_str());
    for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
    if (!o.passed) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
