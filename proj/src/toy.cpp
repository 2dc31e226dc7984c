#include <cmath>
#include <numbers>

#include "bvfim/problems.hpp"

namespace bvfim {

Problem make_toy(double a) {
  Problem p;
  p.name = "toy";
  p.dim_x = 1;
  p.dim_y = 1;
  p.eval_F = [a](VecView x, VecView y) {
    return (x[0] - a) * (x[0] - a) + (y[0] - a) * (y[0] - a);
  };
  p.eval_f = [](VecView x, VecView y) { return std::sin(x[0] + y[0]); };
  p.grad_F_x = [a](VecView x, VecView) { return Vec{2.0 * (x[0] - a)}; };
  p.grad_F_y = [a](VecView, VecView y) { return Vec{2.0 * (y[0] - a)}; };
  p.grad_f_x = [](VecView x, VecView y) { return Vec{std::cos(x[0] + y[0])}; };
  p.grad_f_y = [](VecView x, VecView y) { return Vec{std::cos(x[0] + y[0])}; };
  p.hvp_f_yy = [](VecView x, VecView y, VecView v) { return Vec{-std::sin(x[0] + y[0]) * v[0]}; };
  p.jvp_f_xy = [](VecView x, VecView y, VecView v) { return Vec{-std::sin(x[0] + y[0]) * v[0]}; };
  p.dist_to_ll_solution = [](VecView x, VecView y) {
    return std::abs(std::remainder(x[0] + y[0] + std::numbers::pi / 2, 2 * std::numbers::pi));
  };

  // Closest point of {x = y, x + y = -pi/2 + 2 pi j} to (a, a).
  const double j = std::round((2 * a + std::numbers::pi / 2) / (2 * std::numbers::pi));
  const double star = (-std::numbers::pi / 2 + 2 * std::numbers::pi * j) / 2;
  p.known_optimum = KnownOptimum{{star}, {star}, 2 * (star - a) * (star - a)};
  return p;
}

}  // namespace bvfim
