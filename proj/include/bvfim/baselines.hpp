#pragma once

// Second-order hypergradient baselines: reverse-mode differentiation through
// T lower-level gradient steps (RHG, truncated: TRHG) and implicit
// differentiation with a CG or Neumann-series inverse-Hessian product.

#include <cstddef>
#include <optional>
#include <string>

#include "bvfim/bvfim.hpp"
#include "bvfim/problem.hpp"
#include "bvfim/trace.hpp"

namespace bvfim {

struct UnrollConfig {
  std::size_t T = 100;
  double s = 0.1;  // LL step size; T * s = 10 solves the toy lower level
  std::optional<std::size_t> truncate_at;  // reverse pass covers the last truncate_at steps

  void validate() const;
};

enum class ImplicitMethod { Cg, Neumann };

struct ImplicitConfig {
  std::size_t T = 100;
  std::size_t J = 20;
  ImplicitMethod method = ImplicitMethod::Cg;
  double s = 0.1;  // LL step size; also the Neumann damping
  double cg_rel_tol = 1e-14;

  void validate() const;
};

struct Hypergradient {
  Vec g;
  Vec y;  // final lower-level iterate y_T
  bool curvature_warning = false;
  std::size_t linear_iterations = 0;
};

/// Needs hvp_f_yy and jvp_f_xy; throws Error(Capability) otherwise.
Hypergradient rhg_hypergradient(Oracles& oracles, VecView x, VecView y0, const UnrollConfig& cfg);

/// Needs hvp_f_yy and jvp_f_xy; throws Error(Capability) otherwise. CG keeps
/// iterating through non-positive curvature and flags it; a curvature of
/// exactly zero ends the iteration.
Hypergradient implicit_hypergradient(Oracles& oracles, VecView x, VecView y0, const ImplicitConfig& cfg);

enum class BaselineMethod { Rhg, Trhg, Cg, Neumann };

std::string to_string(BaselineMethod method);
BaselineMethod parse_baseline_method(const std::string& text);

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::Rhg;
  UnrollConfig unroll;
  ImplicitConfig implicit;
  std::size_t K = 500;
  double alpha = 0.01;
  OuterOptimizer optimizer = OuterOptimizer::Adam;
  AdamParams adam;
  bool warm_start = true;  // each outer step starts the LL solve from the previous y_T
  std::size_t record_every = 1;

  void validate() const;
};

/// Outer loop with the chosen hypergradient; same trace schema as run().
/// Trace values F and f are evaluated outside the oracle counters.
RunResult run_baseline(const Problem& problem, const BaselineConfig& config, VecView x0, VecView y0);

}  // namespace bvfim
