#include "bvfim/problem.hpp"

#include <algorithm>
#include <cmath>

#include "bvfim/error.hpp"
#include "bvfim/kernels.hpp"

namespace bvfim {

bool all_finite(VecView v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

void validate(const Problem& p) {
  if (p.dim_x == 0 || p.dim_y == 0)
    throw Error(ErrorKind::Config, "problem '" + p.name + "': dimensions must be positive");
  if (!p.eval_F || !p.eval_f || !p.grad_F_x || !p.grad_F_y || !p.grad_f_x || !p.grad_f_y)
    throw Error(ErrorKind::Config, "problem '" + p.name + "': missing first-order oracle");
  if (p.box_x) {
    const auto& box = *p.box_x;
    if (box.lower.size() != p.dim_x || box.upper.size() != p.dim_x)
      throw Error(ErrorKind::Config, "problem '" + p.name + "': box dimension mismatch");
    for (std::size_t i = 0; i < p.dim_x; ++i)
      if (!(box.lower[i] <= box.upper[i]))
        throw Error(ErrorKind::Config, "problem '" + p.name + "': box lower > upper");
  }
}

Problem with_fd_second_order(Problem problem, double rel_step) {
  auto grad_y = problem.grad_f_y;
  auto grad_x = problem.grad_f_x;
  // h chosen so that h * |v| is rel_step relative to the scale of y.
  auto step = [rel_step](VecView y, VecView v) {
    const double vn = kernels::norm2(v);
    if (vn == 0.0) return 0.0;
    return rel_step * (1.0 + kernels::norm2(y)) / vn;
  };
  auto central = [step](const GradientOracle& g, VecView x, VecView y, VecView v, std::size_t out) {
    const double h = step(y, v);
    if (h == 0.0) return Vec(out, 0.0);
    Vec yp(y.begin(), y.end());
    Vec ym(y.begin(), y.end());
    kernels::axpy(h, v, yp);
    kernels::axpy(-h, v, ym);
    Vec r = g(x, yp);
    const Vec rm = g(x, ym);
    kernels::axpby(-0.5 / h, rm, 0.5 / h, r);
    return r;
  };
  const std::size_t n = problem.dim_y;
  const std::size_t m = problem.dim_x;
  problem.hvp_f_yy = [grad_y, central, n](VecView x, VecView y, VecView v) {
    return central(grad_y, x, y, v, n);
  };
  problem.jvp_f_xy = [grad_x, central, m](VecView x, VecView y, VecView v) {
    return central(grad_x, x, y, v, m);
  };
  problem.second_order_is_fd = true;
  return problem;
}

OracleCounters operator-(const OracleCounters& a, const OracleCounters& b) {
  OracleCounters d;
  d.eval_F = a.eval_F - b.eval_F;
  d.eval_f = a.eval_f - b.eval_f;
  d.grad_F_x = a.grad_F_x - b.grad_F_x;
  d.grad_F_y = a.grad_F_y - b.grad_F_y;
  d.grad_f_x = a.grad_f_x - b.grad_f_x;
  d.grad_f_y = a.grad_f_y - b.grad_f_y;
  d.hvp = a.hvp - b.hvp;
  d.jvp = a.jvp - b.jvp;
  d.second_order_fd = a.second_order_fd;
  return d;
}

namespace {

double checked(double v, const char* oracle, const std::string& problem) {
  if (!std::isfinite(v))
    throw Error(ErrorKind::NonFinite, std::string(oracle) + " returned a non-finite value on '" +
                                          problem + "'");
  return v;
}

Vec checked(Vec v, std::size_t expect, const char* oracle, const std::string& problem) {
  if (v.size() != expect)
    throw Error(ErrorKind::Config, std::string(oracle) + " returned a vector of wrong length on '" +
                                       problem + "'");
  if (!all_finite(v))
    throw Error(ErrorKind::NonFinite, std::string(oracle) + " returned a non-finite value on '" +
                                          problem + "'");
  return v;
}

}  // namespace

Oracles::Oracles(const Problem& problem, OracleCounters& counters)
    : problem_(problem), counters_(counters) {
  counters_.second_order_fd = problem.second_order_is_fd;
}

double Oracles::F(VecView x, VecView y) {
  ++counters_.eval_F;
  return checked(problem_.eval_F(x, y), "F", problem_.name);
}

double Oracles::f(VecView x, VecView y) {
  ++counters_.eval_f;
  return checked(problem_.eval_f(x, y), "f", problem_.name);
}

Vec Oracles::grad_F_x(VecView x, VecView y) {
  ++counters_.grad_F_x;
  return checked(problem_.grad_F_x(x, y), problem_.dim_x, "grad_F_x", problem_.name);
}

Vec Oracles::grad_F_y(VecView x, VecView y) {
  ++counters_.grad_F_y;
  return checked(problem_.grad_F_y(x, y), problem_.dim_y, "grad_F_y", problem_.name);
}

Vec Oracles::grad_f_x(VecView x, VecView y) {
  ++counters_.grad_f_x;
  return checked(problem_.grad_f_x(x, y), problem_.dim_x, "grad_f_x", problem_.name);
}

Vec Oracles::grad_f_y(VecView x, VecView y) {
  ++counters_.grad_f_y;
  return checked(problem_.grad_f_y(x, y), problem_.dim_y, "grad_f_y", problem_.name);
}

Vec Oracles::hvp_f_yy(VecView x, VecView y, VecView v) {
  require_second_order("hvp_f_yy");
  ++counters_.hvp;
  return checked(problem_.hvp_f_yy(x, y, v), problem_.dim_y, "hvp_f_yy", problem_.name);
}

Vec Oracles::jvp_f_xy(VecView x, VecView y, VecView v) {
  require_second_order("jvp_f_xy");
  ++counters_.jvp;
  return checked(problem_.jvp_f_xy(x, y, v), problem_.dim_x, "jvp_f_xy", problem_.name);
}

void Oracles::require_second_order(const std::string& solver) const {
  if (!problem_.has_second_order())
    throw Error(ErrorKind::Capability,
                solver + " requires second-order product oracles, which problem '" +
                    problem_.name + "' does not provide (enable fd_second_order)");
}

}  // namespace bvfim
