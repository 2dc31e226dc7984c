#pragma once

// Bi-level value-function interior-point solver.
//
// Each outer stage k fixes (mu1, mu2, theta, tau) and performs L updates of
// x. One update at x_l:
//   1. z  <- T_z gradient steps on  f(x_l, .) + mu1/2 |.|^2
//      f_reg = f(x_l, z) + mu1/2 |z|^2 + mu2
//   2. y  <- T_y gradient steps on  F(x_l, .) + theta/2 |.|^2 - tau ln(f_reg - f(x_l, .))
//   3. g   = grad_x F(x_l, y) + tau (grad_x f(x_l, y) - grad_x f(x_l, z)) / (f_reg - f(x_l, y))
//   4. x  <- x_l - alpha g   (or an Adam step), then clamp to box_x
// Only first-order oracles are used.

#include <chrono>
#include <cstddef>
#include <optional>

#include "bvfim/problem.hpp"
#include "bvfim/schedule.hpp"
#include "bvfim/trace.hpp"

namespace bvfim {

enum class OuterOptimizer { Gd, Adam };

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct SolverConfig {
  std::size_t T_z = 50;
  std::size_t T_y = 25;
  std::size_t L = 1;
  std::size_t K = 500;
  double s1 = 0.01;
  double s2 = 0.01;
  double alpha = 0.01;
  OuterOptimizer optimizer = OuterOptimizer::Adam;
  AdamParams adam;
  bool warm_start_y = false;
  double barrier_floor = 1e-12;
  std::size_t backtrack_max = 30;
  std::size_t record_every = 1;

  /// Throws Error(Config) on non-positive steps/counts or a floor outside (0, 1e-6].
  void validate() const;
};

struct ZSolve {
  Vec z;
  double f_reg = 0.0;
};

/// T_z steps of z <- z - s1 (grad_y f(x, z) + mu1 z) from z0. Costs exactly
/// T_z grad_f_y calls and one eval_f call.
ZSolve solve_z(Oracles& oracles, VecView x, double mu1, double mu2, VecView z0, std::size_t T_z,
               double s1);

struct YSolve {
  Vec y;
  double f = 0.0;          // f(x, y)
  double F = 0.0;          // F(x, y)
  double objective = 0.0;  // barrier objective at y
  std::size_t accepted = 0;
  std::size_t halvings = 0;           // rejected trial points
  std::size_t infeasible_trials = 0;  // rejections that left the log domain
};

/// T_y accepted gradient steps on the barrier objective from y0. A trial
/// step is halved (at most backtrack_max times) until f_reg - f >= barrier_floor
/// and the objective does not increase. The direction is computed once per
/// step, so the cost is T_y calls each to grad_F_y and grad_f_y, 1 + T_y +
/// halvings calls to eval_f and 1 + T_y + halvings - infeasible_trials calls to
/// eval_F. With tau == 0 the barrier and its domain are dropped.
YSolve solve_y(Oracles& oracles, VecView x, double f_reg, double theta, double tau, VecView y0,
               const SolverConfig& config);

/// Approximate gradient of the barrier value function. With tau == 0 this
/// returns grad_x F(x, y) without touching grad_f_x. `f_y` may supply a
/// known f(x, y); otherwise one eval_f call is made.
Vec hyper_gradient(Oracles& oracles, VecView x, VecView y, VecView z, double f_reg, double tau,
                   std::optional<double> f_y = std::nullopt);

struct AdamMoments {
  Vec m;
  Vec v;
};

/// Bias-corrected Adam increment for step t >= 1; updates the moments.
Vec adam_step(AdamMoments& moments, VecView g, double alpha, const AdamParams& params,
              std::size_t t);

void project_to_box(const std::optional<Box>& box, VecSpan x);

struct StageState {
  std::size_t k = 0;
  Vec x;
  Vec y;
  Vec z;
  double f_reg = 0.0;
  AdamMoments adam;
  std::size_t updates = 0;  // x updates performed so far
};

using Clock = std::chrono::steady_clock;

/// Runs the L updates of stage state.k, appending trace records.
void outer_stage(Oracles& oracles, StageState& state, const Schedule& schedule,
                 const SolverConfig& config, Trace& trace, Clock::time_point started);

struct RunResult {
  Vec x;
  Vec y;
  Trace trace;
  OracleCounters counters;
};

/// K outer stages from (x0, y0). z starts from y0 on stage 0 and from the
/// previous z afterwards. Throws RunError carrying the partial trace.
RunResult run(const Problem& problem, const Schedule& schedule, const SolverConfig& config,
              VecView x0, VecView y0);

/// Fills a trace record from values already computed at (x_l, y).
TraceRecord make_record(const Problem& problem, std::size_t k, std::size_t l, std::size_t step,
                        VecView x_after, double F, double f, double f_reg, double dist_y,
                        double grad_norm, const OracleCounters& calls, Clock::time_point started);

/// problem.dist_to_ll_solution(x, y), or NaN when the problem has none.
double ll_distance(const Problem& problem, VecView x, VecView y);

bool should_record(std::size_t step, std::size_t total_steps, std::size_t record_every);

}  // namespace bvfim
