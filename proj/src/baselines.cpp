#include "bvfim/baselines.hpp"

#include <cmath>
#include <limits>

#include "bvfim/error.hpp"
#include "bvfim/kernels.hpp"

namespace bvfim {

void UnrollConfig::validate() const {
  if (T < 1) throw Error(ErrorKind::Config, "unroll: T must be at least 1");
  if (!(s > 0)) throw Error(ErrorKind::Config, "unroll: s must be positive");
  if (truncate_at && (*truncate_at < 1 || *truncate_at > T))
    throw Error(ErrorKind::Config, "unroll: truncate_at must lie in [1, T]");
}

void ImplicitConfig::validate() const {
  if (!(s > 0)) throw Error(ErrorKind::Config, "implicit: s must be positive");
  if (J < 1) throw Error(ErrorKind::Config, "implicit: J must be >= 1");
}

std::string to_string(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::Rhg: return "rhg";
    case BaselineMethod::Trhg: return "trhg";
    case BaselineMethod::Cg: return "cg";
    case BaselineMethod::Neumann: return "neumann";
  }
  return "unknown";
}

BaselineMethod parse_baseline_method(const std::string& text) {
  if (text == "rhg") return BaselineMethod::Rhg;
  if (text == "trhg") return BaselineMethod::Trhg;
  if (text == "cg") return BaselineMethod::Cg;
  if (text == "neumann") return BaselineMethod::Neumann;
  throw Error(ErrorKind::Config, "unknown baseline method '" + text + "'");
}

void BaselineConfig::validate() const {
  unroll.validate();
  implicit.validate();
  if (!(alpha >= 0)) throw Error(ErrorKind::Config, "baseline: alpha must be non-negative");
  if (record_every == 0) throw Error(ErrorKind::Config, "baseline: record_every must be >= 1");
}

Hypergradient rhg_hypergradient(Oracles& oracles, VecView x, VecView y0, const UnrollConfig& cfg) {
  oracles.require_second_order("rhg");
  // forward pass, keeping every iterate
  std::vector<Vec> ys;
  ys.reserve(cfg.T + 1);
  ys.emplace_back(y0.begin(), y0.end());
  for (std::size_t t = 0; t < cfg.T; ++t) {
    Vec next = ys.back();
    kernels::axpy(-cfg.s, oracles.grad_f_y(x, ys.back()), next);
    ys.push_back(std::move(next));
  }

  Hypergradient out;
  const Vec& yT = ys.back();
  out.g = oracles.grad_F_x(x, yT);
  Vec p = oracles.grad_F_y(x, yT);
  // y_{t+1} = y_t - s grad_y f(x, y_t):
  //   g   += -s (d^2 f/dx dy)^T p_{t+1}
  //   p_t  = p_{t+1} - s (d^2 f/dy^2) p_{t+1}
  const std::size_t span = cfg.truncate_at.value_or(cfg.T);
  for (std::size_t t = cfg.T; t-- > cfg.T - span;) {
    kernels::axpy(-cfg.s, oracles.jvp_f_xy(x, ys[t], p), out.g);
    if (t > cfg.T - span) kernels::axpy(-cfg.s, oracles.hvp_f_yy(x, ys[t], p), p);
  }
  out.y = yT;
  return out;
}

Hypergradient implicit_hypergradient(Oracles& oracles, VecView x, VecView y0, const ImplicitConfig& cfg) {
  oracles.require_second_order(cfg.method == ImplicitMethod::Cg ? "cg" : "neumann");
  Hypergradient out;
  out.y.assign(y0.begin(), y0.end());
  for (std::size_t t = 0; t < cfg.T; ++t) kernels::axpy(-cfg.s, oracles.grad_f_y(x, out.y), out.y);

  const Vec b = oracles.grad_F_y(x, out.y);
  const std::size_t n = b.size();
  Vec q(n, 0.0);
  if (cfg.method == ImplicitMethod::Cg) {
    Vec r = b;
    Vec p = r;
    double rr = kernels::dot(r, r);
    const double stop = cfg.cg_rel_tol * std::sqrt(rr);
    for (std::size_t j = 0; j < cfg.J && std::sqrt(rr) > stop && rr > 0.0; ++j) {
      const Vec hp = oracles.hvp_f_yy(x, out.y, p);
      const double curvature = kernels::dot(p, hp);
      ++out.linear_iterations;
      if (curvature <= 0.0) out.curvature_warning = true;
      if (curvature == 0.0) break;
      const double step = rr / curvature;
      kernels::axpy(step, p, q);
      kernels::axpy(-step, hp, r);
      const double rr_next = kernels::dot(r, r);
      kernels::axpby(1.0, r, rr_next / rr, p);
      rr = rr_next;
    }
  } else {
    // q = s sum_{j=0}^{J} (I - s H)^j b
    Vec term = b;
    for (double& v : term) v *= cfg.s;
    q = term;
    for (std::size_t j = 1; j <= cfg.J; ++j) {
      kernels::axpy(-cfg.s, oracles.hvp_f_yy(x, out.y, term), term);
      kernels::axpy(1.0, term, q);
      ++out.linear_iterations;
    }
  }
  out.g = oracles.grad_F_x(x, out.y);
  kernels::axpy(-1.0, oracles.jvp_f_xy(x, out.y, q), out.g);
  return out;
}

RunResult run_baseline(const Problem& problem, const BaselineConfig& config, VecView x0, VecView y0) {
  validate(problem);
  config.validate();
  if (x0.size() != problem.dim_x || y0.size() != problem.dim_y)
    throw Error(ErrorKind::Config, "run_baseline: initial point has the wrong dimension");

  RunResult result;
  Oracles oracles(problem, result.counters);
  const std::string name = to_string(config.method);
  oracles.require_second_order(name);

  UnrollConfig unroll = config.unroll;
  if (config.method == BaselineMethod::Trhg && !unroll.truncate_at) unroll.truncate_at = std::max<std::size_t>(1, unroll.T / 2);
  if (config.method == BaselineMethod::Rhg) unroll.truncate_at.reset();
  ImplicitConfig implicit = config.implicit;
  implicit.method = config.method == BaselineMethod::Neumann ? ImplicitMethod::Neumann : ImplicitMethod::Cg;

  Vec x(x0.begin(), x0.end());
  Vec y(y0.begin(), y0.end());
  project_to_box(problem.box_x, x);
  AdamMoments moments;
  const auto started = Clock::now();
  try {
    for (std::size_t k = 0; k < config.K; ++k) {
      const Vec& start = config.warm_start ? y : Vec(y0.begin(), y0.end());
      Hypergradient hg;
      try {
        hg = (config.method == BaselineMethod::Rhg || config.method == BaselineMethod::Trhg)
                 ? rhg_hypergradient(oracles, x, start, unroll)
                 : implicit_hypergradient(oracles, x, start, implicit);
      } catch (const Error& e) {
        throw Error(e.kind(), name + " iteration " + std::to_string(k) + ": " + e.what());
      }
      if (hg.curvature_warning) ++result.trace.curvature_warnings;
      const double F = problem.eval_F(x, hg.y);
      const double f = problem.eval_f(x, hg.y);
      const double dist_y = ll_distance(problem, x, hg.y);
      if (config.optimizer == OuterOptimizer::Adam) {
        kernels::axpy(1.0, adam_step(moments, hg.g, config.alpha, config.adam, k + 1), x);
      } else {
        kernels::axpy(-config.alpha, hg.g, x);
      }
      project_to_box(problem.box_x, x);
      if (!all_finite(x)) throw Error(ErrorKind::NonFinite, name + " iteration " + std::to_string(k) + ": non-finite x");
      y = std::move(hg.y);
      if (should_record(k + 1, config.K, config.record_every))
        result.trace.records.push_back(make_record(problem, k, 0, k + 1, x, F, f,
                                                   std::numeric_limits<double>::quiet_NaN(), dist_y,
                                                   kernels::norm2(hg.g), result.counters, started));
    }
  } catch (const Error& e) {
    throw RunError(e, std::move(result.trace), result.counters);
  }
  result.x = std::move(x);
  result.y = std::move(y);
  return result;
}

}  // namespace bvfim
