#include <doctest.h>

#include <cmath>

#include "bvfim/baselines.hpp"
#include "bvfim/error.hpp"
#include "bvfim/problems.hpp"
#include "bvfim/verify.hpp"

using namespace bvfim;

namespace {

// With T s large the lower level is solved, so every method should recover
// grad phi(x) of the quadratic.
struct Fixture {
  QuadraticProblem q = make_random_quadratic(6, 3, 21);
  Vec x{0.4, -0.7, 1.2};
  Vec y0 = Vec(6, 0.0);
};

}  // namespace

TEST_CASE("RHG, CG and Neumann recover grad phi on the quadratic") {
  Fixture fx;
  const Vec expect = fx.q.grad_phi(fx.x);

  OracleCounters c;
  Oracles o(fx.q.problem, c);
  UnrollConfig u;
  u.T = 400;
  u.s = 0.5;
  CHECK(verify::relative_error(rhg_hypergradient(o, fx.x, fx.y0, u).g, expect, 1e-12) < 1e-10);
  CHECK(c.hvp == u.T - 1);  // y_0 does not depend on x
  CHECK(c.jvp == u.T);

  ImplicitConfig cg;
  cg.T = 400;
  cg.s = 0.5;
  cg.J = 6;
  CHECK(verify::relative_error(implicit_hypergradient(o, fx.x, fx.y0, cg).g, expect, 1e-12) < 1e-10);

  ImplicitConfig ne = cg;
  ne.method = ImplicitMethod::Neumann;
  ne.J = 60;
  CHECK(verify::relative_error(implicit_hypergradient(o, fx.x, fx.y0, ne).g, expect, 1e-12) < 1e-10);
}

TEST_CASE("truncated reverse pass differs from the full one when the lower level is unsolved") {
  Fixture fx;
  OracleCounters c;
  Oracles o(fx.q.problem, c);
  UnrollConfig full;
  full.T = 10;
  full.s = 0.1;
  UnrollConfig trunc = full;
  trunc.truncate_at = 2;
  const Vec a = rhg_hypergradient(o, fx.x, fx.y0, full).g;
  const OracleCounters before = c;
  const Vec b = rhg_hypergradient(o, fx.x, fx.y0, trunc).g;
  CHECK((c - before).jvp == 2);
  CHECK((c - before).hvp == 1);
  CHECK(verify::relative_error(a, b) > 1e-3);
}

TEST_CASE("RHG matches finite differences of the unrolled objective") {
  // F(x, y_T(x)) with y_T from T plain gradient steps is differentiated exactly.
  const Problem toy = make_toy(0.0);
  UnrollConfig u;
  u.T = 30;
  u.s = 0.1;
  auto unrolled = [&](VecView x) {
    Vec y{0.5};
    for (std::size_t t = 0; t < u.T; ++t) y[0] -= u.s * toy.grad_f_y(x, y)[0];
    return toy.eval_F(x, y);
  };
  OracleCounters c;
  Oracles o(toy, c);
  for (double x : {-0.5, 0.8, 2.0}) {
    const Vec g = rhg_hypergradient(o, Vec{x}, Vec{0.5}, u).g;
    const Vec fd = verify::fd_gradient(unrolled, Vec{x}, 1e-6);
    CHECK(g[0] == doctest::Approx(fd[0]).epsilon(1e-6));
  }
}

TEST_CASE("CG flags non-positive curvature") {
  // At (x, y) = (0, pi/2) the toy lower level is concave in y.
  const Problem toy = make_toy(0.0);
  OracleCounters c;
  Oracles o(toy, c);
  ImplicitConfig cfg;
  cfg.T = 1;
  cfg.s = 1e-9;
  const Hypergradient h = implicit_hypergradient(o, Vec{0.0}, Vec{std::numbers::pi / 2}, cfg);
  CHECK(h.curvature_warning);
}

TEST_CASE("baselines refuse problems without second-order oracles") {
  Problem p = make_toy(0.0);
  p.hvp_f_yy = nullptr;
  for (BaselineMethod m : {BaselineMethod::Rhg, BaselineMethod::Trhg, BaselineMethod::Cg, BaselineMethod::Neumann}) {
    BaselineConfig cfg;
    cfg.method = m;
    try {
      run_baseline(p, cfg, Vec{0.0}, Vec{0.0});
      FAIL("expected a capability error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Capability);
      CHECK(std::string(e.what()).find(to_string(m)) != std::string::npos);
    }
  }
}

TEST_CASE("finite-difference products let baselines run and are flagged") {
  Problem p = make_toy(0.0);
  p.hvp_f_yy = nullptr;
  p.jvp_f_xy = nullptr;
  BaselineConfig cfg;
  cfg.K = 20;
  const RunResult r = run_baseline(with_fd_second_order(p), cfg, Vec{0.0}, Vec{0.0});
  CHECK(r.counters.second_order_fd);
  CHECK(r.counters.hvp > 0);
  CHECK(r.trace.records.size() == 20);
  CHECK(std::isnan(r.trace.records.front().f_reg));
}

TEST_CASE("baseline config validation and names") {
  UnrollConfig u;
  u.T = 0;
  CHECK_THROWS_AS(u.validate(), Error);
  ImplicitConfig i;
  i.J = 0;
  CHECK_THROWS_AS(i.validate(), Error);
  for (auto m : {BaselineMethod::Rhg, BaselineMethod::Trhg, BaselineMethod::Cg, BaselineMethod::Neumann})
    CHECK(parse_baseline_method(to_string(m)) == m);
  CHECK_THROWS(parse_baseline_method("lbfgs"));
}

TEST_CASE("RHG from the origin reaches the toy optimum, from (3,3) it stalls") {
  const Problem toy = make_toy(0.0);
  const double f_star = 2.0 * std::pow(std::numbers::pi / 4, 2);
  BaselineConfig cfg;
  CHECK(run_baseline(toy, cfg, Vec{0.0}, Vec{0.0}).trace.records.back().F == doctest::Approx(f_star).epsilon(0.02));
  CHECK(run_baseline(toy, cfg, Vec{3.0}, Vec{3.0}).trace.records.back().F > f_star + 0.1);
}
