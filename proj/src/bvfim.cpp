#include "bvfim/bvfim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bvfim/error.hpp"
#include "bvfim/kernels.hpp"

namespace bvfim {

void SolverConfig::validate() const {
  if (T_z == 0 || T_y == 0 || L == 0) throw Error(ErrorKind::Config, "solver: T_z, T_y and L must be >= 1");
  if (!(s1 > 0 && s2 > 0)) throw Error(ErrorKind::Config, "solver: s1 and s2 must be positive");
  if (!(alpha >= 0)) throw Error(ErrorKind::Config, "solver: alpha must be non-negative");
  if (!(barrier_floor > 0 && barrier_floor <= 1e-6))
    throw Error(ErrorKind::Config, "solver: barrier_floor must lie in (0, 1e-6]");
  if (record_every == 0) throw Error(ErrorKind::Config, "solver: record_every must be >= 1");
  if (!(adam.beta1 >= 0 && adam.beta1 < 1 && adam.beta2 >= 0 && adam.beta2 < 1 && adam.eps > 0))
    throw Error(ErrorKind::Config, "solver: invalid Adam parameters");
}

ZSolve solve_z(Oracles& oracles, VecView x, double mu1, double mu2, VecView z0, std::size_t T_z,
               double s1) {
  Vec z(z0.begin(), z0.end());
  for (std::size_t t = 1; t <= T_z; ++t) {
    Vec g;
    try {
      g = oracles.grad_f_y(x, z);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonFinite) throw;
      throw Error(ErrorKind::DivergedInner, "solve_z step " + std::to_string(t) + ": " + e.what());
    }
    // z <- (1 - s1 mu1) z - s1 g
    kernels::axpby(-s1, g, 1.0 - s1 * mu1, z);
    if (!all_finite(z))
      throw Error(ErrorKind::DivergedInner, "solve_z step " + std::to_string(t) + ": iterate is not finite");
  }
  double fz;
  try {
    fz = oracles.f(x, z);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NonFinite) throw;
    throw Error(ErrorKind::DivergedInner, std::string("solve_z final value: ") + e.what());
  }
  const double f_reg = fz + 0.5 * mu1 * kernels::dot(z, z) + mu2;
  return {std::move(z), f_reg};
}

namespace {

double barrier_objective(double F, double f, double f_reg, double theta, double tau, VecView y) {
  double obj = F + 0.5 * theta * kernels::dot(y, y);
  if (tau != 0.0) obj -= tau * std::log(f_reg - f);
  return obj;
}

}  // namespace

YSolve solve_y(Oracles& oracles, VecView x, double f_reg, double theta, double tau, VecView y0,
               const SolverConfig& config) {
  const bool barrier = tau != 0.0;
  YSolve out;
  out.y.assign(y0.begin(), y0.end());
  out.f = oracles.f(x, out.y);
  if (barrier && !(f_reg - out.f > 0.0))
    throw Error(ErrorKind::InfeasibleStart, "solve_y: f_reg - f(x, y0) = " + format_double(f_reg - out.f) +
                                                " is not positive");
  out.F = oracles.F(x, out.y);
  out.objective = barrier_objective(out.F, out.f, f_reg, theta, tau, out.y);

  Vec trial(out.y.size());
  for (std::size_t t = 1; t <= config.T_y; ++t) {
    Vec d = oracles.grad_F_y(x, out.y);
    const Vec gf = oracles.grad_f_y(x, out.y);
    kernels::axpy(theta, out.y, d);
    if (barrier) kernels::axpy(tau / (f_reg - out.f), gf, d);

    double step = config.s2;
    bool accepted = false;
    for (std::size_t b = 0; b <= config.backtrack_max; ++b, step *= 0.5) {
      if (b > 0) ++out.halvings;
      std::copy(out.y.begin(), out.y.end(), trial.begin());
      kernels::axpy(-step, d, trial);
      const double f_t = oracles.f(x, trial);
      if (barrier && !(f_reg - f_t >= config.barrier_floor)) {
        ++out.infeasible_trials;
        continue;
      }
      const double F_t = oracles.F(x, trial);
      const double obj_t = barrier_objective(F_t, f_t, f_reg, theta, tau, trial);
      // allow a few ulps of round-off at stationarity
      if (obj_t <= out.objective + 4 * std::numeric_limits<double>::epsilon() * std::abs(out.objective)) {
        out.y.swap(trial);
        out.f = f_t;
        out.F = F_t;
        out.objective = obj_t;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw Error(ErrorKind::BacktrackExhausted, "solve_y step " + std::to_string(t) + ": no acceptable point after " +
                                                     std::to_string(config.backtrack_max) + " halvings");
    ++out.accepted;
  }
  return out;
}

Vec hyper_gradient(Oracles& oracles, VecView x, VecView y, VecView z, double f_reg, double tau,
                   std::optional<double> f_y) {
  Vec g = oracles.grad_F_x(x, y);
  if (tau == 0.0) return g;
  const double fy = f_y ? *f_y : oracles.f(x, y);
  const double gap = f_reg - fy;
  if (!(gap > 0.0))
    throw Error(ErrorKind::BarrierDomain, "hyper_gradient: f_reg - f(x, y) = " + format_double(gap) +
                                              " is not positive");
  Vec diff = oracles.grad_f_x(x, y);
  const Vec gz = oracles.grad_f_x(x, z);
  kernels::axpy(-1.0, gz, diff);
  kernels::axpy(tau / gap, diff, g);
  return g;
}

Vec adam_step(AdamMoments& moments, VecView g, double alpha, const AdamParams& params, std::size_t t) {
  const std::size_t n = g.size();
  if (moments.m.size() != n) moments.m.assign(n, 0.0);
  if (moments.v.size() != n) moments.v.assign(n, 0.0);
  const double td = static_cast<double>(t);
  const double bias1 = 1.0 - std::pow(params.beta1, td);
  const double bias2 = 1.0 - std::pow(params.beta2, td);
  Vec delta(n);
  kernels::active().adam(g.data(), moments.m.data(), moments.v.data(), delta.data(), n, alpha,
                         params.beta1, params.beta2, params.eps, bias1, bias2);
  return delta;
}

void project_to_box(const std::optional<Box>& box, VecSpan x) {
  if (!box) return;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], box->lower[i], box->upper[i]);
}

bool should_record(std::size_t step, std::size_t total_steps, std::size_t record_every) {
  return step % record_every == 0 || step == total_steps;
}

double ll_distance(const Problem& problem, VecView x, VecView y) {
  if (!problem.dist_to_ll_solution) return std::numeric_limits<double>::quiet_NaN();
  return problem.dist_to_ll_solution(x, y);
}

TraceRecord make_record(const Problem& problem, std::size_t k, std::size_t l, std::size_t step,
                        VecView x_after, double F, double f, double f_reg, double dist_y,
                        double grad_norm, const OracleCounters& calls, Clock::time_point started) {
  TraceRecord r;
  r.k = k;
  r.l = l;
  r.step = step;
  const std::size_t keep = x_after.size() <= 64 ? x_after.size() : 8;
  r.x.assign(x_after.begin(), x_after.begin() + static_cast<std::ptrdiff_t>(keep));
  r.x_norm = kernels::norm2(x_after);
  r.F = F;
  r.f = f;
  r.f_reg = f_reg;
  r.dist_y = dist_y;
  r.grad_norm = grad_norm;
  if (problem.known_optimum) {
    Vec d(x_after.begin(), x_after.end());
    kernels::axpy(-1.0, problem.known_optimum->x, d);
    r.dist_x = kernels::norm2(d);
  } else {
    r.dist_x = std::numeric_limits<double>::quiet_NaN();
  }
  r.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
  r.calls = calls;
  return r;
}

void outer_stage(Oracles& oracles, StageState& state, const Schedule& schedule,
                 const SolverConfig& config, Trace& trace, Clock::time_point started) {
  const Problem& problem = oracles.problem();
  const std::size_t total = config.K * config.L;
  for (std::size_t l = 0; l < config.L; ++l) {
    const std::string where = "stage " + std::to_string(state.k) + ", iteration " + std::to_string(l);
    try {
      Regularization reg = schedule.at(state.k);
      if (schedule.mode == ScheduleMode::AdaptiveMu2) reg.mu2 = schedule.adaptive_mu2(oracles.f(state.x, state.y));

      ZSolve zs = solve_z(oracles, state.x, reg.mu1, reg.mu2, state.z, config.T_z, config.s1);
      state.z = std::move(zs.z);
      state.f_reg = zs.f_reg;

      YSolve ys;
      const VecView y0 = config.warm_start_y ? VecView(state.z) : VecView(state.y);
      try {
        ys = solve_y(oracles, state.x, state.f_reg, reg.theta, reg.tau, y0, config);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InfeasibleStart || config.warm_start_y) throw;
        ++trace.infeasible_restarts;
        ys = solve_y(oracles, state.x, state.f_reg, reg.theta, reg.tau, state.z, config);
      }
      state.y = std::move(ys.y);

      const Vec g = hyper_gradient(oracles, state.x, state.y, state.z, state.f_reg, reg.tau, ys.f);
      const double dist_y = ll_distance(problem, state.x, state.y);
      ++state.updates;
      if (config.optimizer == OuterOptimizer::Adam) {
        const Vec delta = adam_step(state.adam, g, config.alpha, config.adam, state.updates);
        kernels::axpy(1.0, delta, state.x);
      } else {
        kernels::axpy(-config.alpha, g, state.x);
      }
      project_to_box(problem.box_x, state.x);
      if (!all_finite(state.x)) throw Error(ErrorKind::NonFinite, "x update produced a non-finite iterate");

      const std::size_t step = state.k * config.L + l + 1;
      if (should_record(step, total, config.record_every))
        trace.records.push_back(make_record(problem, state.k, l, step, state.x, ys.F, ys.f, state.f_reg,
                                            dist_y, kernels::norm2(g), oracles.counters(), started));
    } catch (const Error& e) {
      throw Error(e.kind(), where + ": " + e.what());
    }
  }
}

RunResult run(const Problem& problem, const Schedule& schedule, const SolverConfig& config,
              VecView x0, VecView y0) {
  validate(problem);
  config.validate();
  schedule.validate();
  if (x0.size() != problem.dim_x || y0.size() != problem.dim_y)
    throw Error(ErrorKind::Config, "run: initial point has the wrong dimension");

  RunResult result;
  Oracles oracles(problem, result.counters);
  StageState state;
  state.x.assign(x0.begin(), x0.end());
  state.y.assign(y0.begin(), y0.end());
  state.z.assign(y0.begin(), y0.end());
  project_to_box(problem.box_x, state.x);

  const auto started = Clock::now();
  try {
    for (std::size_t k = 0; k < config.K; ++k) {
      state.k = k;
      outer_stage(oracles, state, schedule, config, result.trace, started);
    }
  } catch (const Error& e) {
    throw RunError(e, std::move(result.trace), result.counters);
  }
  result.x = std::move(state.x);
  result.y = std::move(state.y);
  return result;
}

}  // namespace bvfim
