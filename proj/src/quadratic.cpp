#include <cmath>
#include <memory>

#include "bvfim/error.hpp"
#include "bvfim/kernels.hpp"
#include "bvfim/linalg.hpp"
#include "bvfim/problems.hpp"
#include "bvfim/rng.hpp"

namespace bvfim {

namespace {

struct QuadData {
  Matrix A;
  Vec b;
};

// r = y - A x
Vec residual(const QuadData& d, VecView x, VecView y) {
  Vec r(y.begin(), y.end());
  Vec ax(d.A.rows);
  kernels::gemv(d.A, x, ax);
  kernels::axpy(-1.0, ax, r);
  return r;
}

}  // namespace

double QuadraticProblem::phi(VecView x) const {
  Vec ax(A.rows);
  kernels::gemv(A, x, ax);
  kernels::axpy(-1.0, b, ax);
  return 0.5 * kernels::dot(x, x) + 0.5 * kernels::dot(ax, ax);
}

Vec QuadraticProblem::grad_phi(VecView x) const {
  Vec ax(A.rows);
  kernels::gemv(A, x, ax);
  kernels::axpy(-1.0, b, ax);
  Vec g(A.cols);
  kernels::gemv_t(A, ax, g);
  kernels::axpy(1.0, x, g);
  return g;
}

Vec QuadraticProblem::argmin_phi() const {
  Matrix m = multiply(transpose(A), A);
  for (std::size_t i = 0; i < m.rows; ++i) m(i, i) += 1.0;
  Vec rhs(A.cols);
  kernels::gemv_t(A, b, rhs);
  return solve_spd(m, rhs);
}

QuadraticProblem make_quadratic(Matrix A, Vec b) {
  if (A.rows == 0 || A.cols == 0) throw Error(ErrorKind::Config, "quadratic: A must be non-empty");
  if (A.rows != b.size())
    throw Error(ErrorKind::Config, "quadratic: A has " + std::to_string(A.rows) +
                                       " rows but b has length " + std::to_string(b.size()));
  auto data = std::make_shared<const QuadData>(QuadData{A, b});
  const std::size_t n = A.rows;
  const std::size_t m = A.cols;

  Problem p;
  p.name = "quadratic";
  p.dim_x = m;
  p.dim_y = n;
  p.eval_f = [data](VecView x, VecView y) {
    const Vec r = residual(*data, x, y);
    return 0.5 * kernels::dot(r, r);
  };
  p.eval_F = [data](VecView x, VecView y) {
    Vec d(y.begin(), y.end());
    kernels::axpy(-1.0, data->b, d);
    return 0.5 * kernels::dot(x, x) + 0.5 * kernels::dot(d, d);
  };
  p.grad_F_x = [](VecView x, VecView) { return Vec(x.begin(), x.end()); };
  p.grad_F_y = [data](VecView, VecView y) {
    Vec d(y.begin(), y.end());
    kernels::axpy(-1.0, data->b, d);
    return d;
  };
  p.grad_f_y = [data](VecView x, VecView y) { return residual(*data, x, y); };
  p.grad_f_x = [data, m](VecView x, VecView y) {
    const Vec r = residual(*data, x, y);
    Vec g(m);
    kernels::gemv_t(data->A, r, g);
    for (double& v : g) v = -v;
    return g;
  };
  p.hvp_f_yy = [](VecView, VecView, VecView v) { return Vec(v.begin(), v.end()); };
  p.jvp_f_xy = [data, m](VecView, VecView, VecView v) {
    Vec g(m);
    kernels::gemv_t(data->A, v, g);
    for (double& e : g) e = -e;
    return g;
  };
  p.dist_to_ll_solution = [data](VecView x, VecView y) {
    return kernels::norm2(residual(*data, x, y));
  };

  QuadraticProblem q{std::move(A), std::move(b), std::move(p)};
  const Vec xs = q.argmin_phi();
  Vec ys(n);
  kernels::gemv(q.A, xs, ys);
  q.problem.known_optimum = KnownOptimum{xs, ys, q.phi(xs)};
  return q;
}

QuadraticProblem make_random_quadratic(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n == 0 || m == 0) throw Error(ErrorKind::Config, "quadratic: n and m must be positive");
  Rng rng(seed);
  Matrix A(n, m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (double& v : A.data) v = scale * rng.normal();
  Vec b(n);
  for (double& v : b) v = rng.normal();
  return make_quadratic(std::move(A), std::move(b));
}

}  // namespace bvfim
