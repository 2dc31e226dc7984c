#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "bvfim/types.hpp"

namespace bvfim {

using ValueOracle = std::function<double(VecView x, VecView y)>;
using GradientOracle = std::function<Vec(VecView x, VecView y)>;
/// (x, y, v) -> product with a second-derivative block of f.
using ProductOracle = std::function<Vec(VecView x, VecView y, VecView v)>;

struct Box {
  Vec lower;
  Vec upper;
};

struct KnownOptimum {
  Vec x;
  Vec y;
  double F = 0.0;
};

/// A bilevel problem  min_x F(x, y)  s.t.  y in argmin_y f(x, y),  x in X.
///
/// Oracles must be pure and safe to call concurrently. The two product
/// oracles are optional; BVFIM never calls them.
struct Problem {
  std::string name;
  std::size_t dim_x = 0;
  std::size_t dim_y = 0;

  ValueOracle eval_F;
  ValueOracle eval_f;
  GradientOracle grad_F_x;
  GradientOracle grad_F_y;
  GradientOracle grad_f_x;
  GradientOracle grad_f_y;

  ProductOracle hvp_f_yy;  // (d^2 f / dy^2) v, length n
  ProductOracle jvp_f_xy;  // grad_x <grad_y f(x, y), v>, length m
  bool second_order_is_fd = false;

  std::optional<Box> box_x;
  std::optional<KnownOptimum> known_optimum;

  /// Distance from y to the lower-level solution set S(x), when computable.
  std::function<double(VecView x, VecView y)> dist_to_ll_solution;

  bool has_second_order() const { return static_cast<bool>(hvp_f_yy) && static_cast<bool>(jvp_f_xy); }
};

/// Throws Error(Config) when dimensions or the box are inconsistent.
void validate(const Problem& problem);

/// Adds central-difference product oracles built from grad_f_y / grad_f_x.
/// Each product costs two first-order calls made inside the oracle.
Problem with_fd_second_order(Problem problem, double rel_step = 1e-6);

struct OracleCounters {
  std::uint64_t eval_F = 0;
  std::uint64_t eval_f = 0;
  std::uint64_t grad_F_x = 0;
  std::uint64_t grad_F_y = 0;
  std::uint64_t grad_f_x = 0;
  std::uint64_t grad_f_y = 0;
  std::uint64_t hvp = 0;
  std::uint64_t jvp = 0;
  bool second_order_fd = false;

  std::uint64_t second_order() const { return hvp + jvp; }
  std::uint64_t first_order() const {
    return eval_F + eval_f + grad_F_x + grad_F_y + grad_f_x + grad_f_y;
  }
  friend bool operator==(const OracleCounters&, const OracleCounters&) = default;
};

OracleCounters operator-(const OracleCounters& a, const OracleCounters& b);

/// Counted, finiteness-checked access to a problem's oracles. Every call
/// bumps the matching counter; a NaN/Inf result throws Error(NonFinite).
class Oracles {
 public:
  Oracles(const Problem& problem, OracleCounters& counters);

  const Problem& problem() const { return problem_; }
  OracleCounters& counters() { return counters_; }

  double F(VecView x, VecView y);
  double f(VecView x, VecView y);
  Vec grad_F_x(VecView x, VecView y);
  Vec grad_F_y(VecView x, VecView y);
  Vec grad_f_x(VecView x, VecView y);
  Vec grad_f_y(VecView x, VecView y);
  Vec hvp_f_yy(VecView x, VecView y, VecView v);
  Vec jvp_f_xy(VecView x, VecView y, VecView v);

  /// Throws Error(Capability) naming `solver` if product oracles are absent.
  void require_second_order(const std::string& solver) const;

 private:
  const Problem& problem_;
  OracleCounters& counters_;
};

bool all_finite(VecView v);

}  // namespace bvfim
