#pragma once

// Desk-scale numeric checks of the value-function theory: finite-difference
// gradients, brute-force value functions on grids (dim_y <= 2), tight local
// solves of the regularized and barrier sub-problems, and the lemma /
// epi-convergence surrogates.
//
// Nothing here goes through the counted Oracles; the problem's functions are
// called directly.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bvfim/problem.hpp"
#include "bvfim/problems.hpp"
#include "bvfim/schedule.hpp"

namespace bvfim::verify {

using ScalarFn = std::function<double(VecView)>;
using VectorFn = std::function<Vec(VecView)>;

/// Regular grid with points_per_dim points per axis, endpoints included.
struct GridSpec {
  Vec lo;
  Vec hi;
  std::size_t points_per_dim = 0;

  std::size_t dims() const { return lo.size(); }
  std::size_t size() const;
  double spacing(std::size_t axis) const;
  Vec point(std::size_t index) const;
  /// Throws Error(Grid) on hi <= lo, fewer than 3 points per axis,
  /// dims outside [1, 2] or more than 1e7 points.
  void validate() const;
};

/// Central differences; the step along coordinate i is h * max(1, |x_i|).
Vec fd_gradient(const ScalarFn& fn, VecView x, double h);

/// Relative error |a - b| / max(|b|, floor).
double relative_error(VecView a, VecView b, double floor = 1e-8);

struct LocalMin {
  Vec y;
  double value = 0.0;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Gradient descent with Barzilai-Borwein initial steps and Armijo
/// backtracking. `value` may return +inf outside its domain. Stops when
/// |grad| <= tol or when no step decreases the value.
LocalMin minimize_local(const ScalarFn& value, const VectorFn& grad, VecView y0, double tol,
                        std::size_t max_iter = 200000);

/// f*_mu(x) = min_y f(x, y) + mu1/2 |y|^2 + mu2, locally from z0.
LocalMin solve_fstar_mu_local(const Problem& problem, VecView x, double mu1, double mu2, VecView z0,
                              double tol);

struct BarrierValue {
  double value = 0.0;  // phi_{mu,theta,tau}(x)
  Vec y;
  Vec z;
  double f_reg = 0.0;
  bool converged = false;
};

/// phi_{mu,theta,tau}(x) with both inner problems solved to `tol` from the
/// seeds z0 and y0 (y0 falls back to z when infeasible).
BarrierValue barrier_value_local(const Problem& problem, VecView x, const Regularization& reg,
                                 VecView z0, VecView y0, double tol);

struct GridMin {
  Vec y;
  double value = 0.0;
  std::size_t index = 0;
};

/// Grid argmin of fn; ties resolve to the lowest index.
GridMin grid_min(const GridSpec& grid, const ScalarFn& fn);

struct BrutePhi {
  double value = 0.0;
  double tol_f = 0.0;
  double fstar = 0.0;
  std::size_t members = 0;  // grid points accepted into S(x)
  /// min F over the grid's local minima of f(x, .) after a local polish,
  /// keeping those within 1e-10 of the best. Exact when S(x) is a finite set.
  double refined = 0.0;
};

/// phi(x) = min F(x, .) over S(x) ~ {y : f(x, y) <= min_grid f + tol_f},
/// tol_f = 1e-6 + L * spacing with L the largest slope on the cells
/// adjacent to the grid argmin. Throws Error(Grid) when the argmin sits on
/// the grid boundary.
BrutePhi brute_phi(const Problem& problem, VecView x, const GridSpec& grid);

/// f*(x): grid argmin refined by a local solve.
double brute_fstar(const Problem& problem, VecView x, const GridSpec& grid);

/// f*_mu(x): grid argmin of the regularized LL refined by a local solve.
double brute_fstar_mu(const Problem& problem, VecView x, double mu1, double mu2, const GridSpec& grid);

/// psi_mu(x) = min F over grid points with -1 <= f - f*_mu <= 0. Throws
/// Error(Grid) when no grid point qualifies.
double brute_psi(const Problem& problem, VecView x, double mu1, double mu2, const GridSpec& grid);

/// Global phi_k(x): f*_mu from brute_fstar_mu, then a tight barrier solve
/// seeded at every grid local minimum of f(x, .) lying strictly inside the
/// feasible set. Empty when no seed is feasible or every solve fails.
std::optional<double> phi_k_global(const Problem& problem, VecView x, const Regularization& reg,
                                   const GridSpec& grid_y);

struct LemmaReport {
  std::vector<double> values;  // f*_{mu_k}(x_k)
  double tail_max = 0.0;       // max over the final quarter
  double bound = 0.0;          // f*(xbar)
  double eps = 0.0;
  bool passed = false;
};

/// limsup f*_{mu_k}(x_k) <= f*(xbar): the final quarter's max must not
/// exceed f*(xbar) + eps. Needs at least 50 terms.
LemmaReport check_lemma_fstar(const Problem& problem, const std::vector<Vec>& xs, VecView xbar,
                              const std::vector<Regularization>& mus, const GridSpec& grid_y,
                              double eps = 1e-3);

struct EpiStage {
  std::size_t k = 0;
  double upper_gap = 0.0;  // max_x (phi_k - phi)_+
  double lower_gap = 0.0;  // max_x (phi - phi_k)_+
  double tau_ln_mu2 = 0.0;
  double argmin_x = 0.0;  // grid argmin of phi_k (first coordinate)
  std::size_t excluded = 0;
};

struct EpiReport {
  std::vector<EpiStage> stages;
  std::size_t grid_points = 0;
  double slack = 0.0;
  double final_tol = 0.0;
  bool monotone = false;
  bool final_ok = false;
  bool exclusions_ok = false;
  bool passed() const { return monotone && final_ok && exclusions_ok; }
};

/// phi_k from phi_k_global and phi from brute_phi(...).refined at every
/// grid_x point for each stage. The upper gap must be nonincreasing across
/// stages within `slack` and at most `final_tol` at the last stage.
EpiReport check_epiconvergence(const Problem& problem, const Schedule& schedule, const GridSpec& grid_x,
                               const GridSpec& grid_y, const std::vector<std::size_t>& stages,
                               double slack = 1e-3, double final_tol = 0.05);

struct PropOnePoint {
  Vec x;
  Vec analytic;
  Vec fd;
  double rel_error = 0.0;
};

struct PropOneReport {
  std::vector<PropOnePoint> points;
  double max_rel_error = 0.0;
  double tol = 0.0;
  bool passed = false;
};

/// hyper_gradient at tightly solved (y, z) against central differences of
/// phi_{mu,theta,tau}. The FD evaluations reuse the center's solutions as
/// seeds so all three solves track the same local branch.
PropOneReport check_proposition1(const Problem& problem, const Regularization& reg,
                                 const std::vector<Vec>& xs, VecView seed, double h = 1e-5,
                                 double inner_tol = 1e-10, double tol = 1e-4);

struct SandwichReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_lower = 0.0;  // min of f*_mu - (f* + mu2)
  double worst_upper = 0.0;  // min of (f* + mu1/2 |y*|^2 + mu2) - f*_mu
  bool passed = false;
};

/// f* + mu2 <= f*_mu <= f* + mu1/2 |y*(x)|^2 + mu2 on a quadratic with
/// dim_y <= 2, y*(x) = A x, f* = 0, f*_mu from the grid.
SandwichReport check_sandwich(const QuadraticProblem& q, const std::vector<Vec>& xs,
                              const std::vector<Regularization>& mus, const GridSpec& grid_y,
                              double tol);

/// Grid f*_mu nondecreasing in mu1 and in mu2 at each x.
bool check_monotonicity(const Problem& problem, const std::vector<Vec>& xs, const GridSpec& grid_y);

struct RelaxationReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst = 0.0;  // min of phi_k - psi
  bool passed = false;
};

/// psi_{mu_k}(x) <= phi_k(x) at matched stages.
RelaxationReport check_relaxation(const Problem& problem, const Schedule& schedule,
                                  const std::vector<Vec>& xs, const std::vector<std::size_t>& stages,
                                  const GridSpec& grid_y);

/// max over k in [from, to] of |tau_k ln mu_{k,2}|.
double schedule_residual(const Schedule& schedule, std::size_t from, std::size_t to);

enum class Level { Quick, Full };

std::string to_string(Level level);
Level parse_level(const std::string& text);

/// Runs the suite; each entry of "checks" carries id, passed and the
/// measured quantities. "passed" is the conjunction.
nlohmann::json run_suite(Level level);

}  // namespace bvfim::verify
