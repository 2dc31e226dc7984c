#include "bvfim/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "bvfim/bvfim.hpp"
#include "bvfim/error.hpp"
#include "bvfim/kernels.hpp"
#include "bvfim/rng.hpp"

namespace bvfim::verify {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Index of a grid point along each axis.
std::vector<std::size_t> unravel(const GridSpec& grid, std::size_t index) {
  std::vector<std::size_t> idx(grid.dims());
  for (std::size_t a = 0; a < grid.dims(); ++a) {
    idx[a] = index % grid.points_per_dim;
    index /= grid.points_per_dim;
  }
  return idx;
}

std::size_t ravel(const GridSpec& grid, const std::vector<std::size_t>& idx) {
  std::size_t index = 0;
  for (std::size_t a = grid.dims(); a-- > 0;) index = index * grid.points_per_dim + idx[a];
  return index;
}

std::vector<double> evaluate_grid(const GridSpec& grid, const ScalarFn& fn) {
  grid.validate();
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = fn(grid.point(i));
  return values;
}

std::size_t argmin(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[best]) best = i;
  return best;
}

// Axis neighbours of a grid point (interior only).
std::vector<std::size_t> neighbours(const GridSpec& grid, std::size_t index) {
  std::vector<std::size_t> out;
  const auto idx = unravel(grid, index);
  for (std::size_t a = 0; a < grid.dims(); ++a) {
    for (int delta : {-1, 1}) {
      if (delta < 0 && idx[a] == 0) continue;
      if (delta > 0 && idx[a] + 1 == grid.points_per_dim) continue;
      auto n = idx;
      n[a] = delta < 0 ? n[a] - 1 : n[a] + 1;
      out.push_back(ravel(grid, n));
    }
  }
  return out;
}

std::vector<std::size_t> grid_local_minima(const GridSpec& grid, const std::vector<double>& f) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    bool is_min = true;
    for (std::size_t n : neighbours(grid, i))
      if (f[n] < f[i] || (f[n] == f[i] && n < i)) is_min = false;
    if (is_min) out.push_back(i);
  }
  return out;
}

bool on_boundary(const GridSpec& grid, std::size_t index) {
  for (std::size_t i : unravel(grid, index))
    if (i == 0 || i + 1 == grid.points_per_dim) return true;
  return false;
}

ScalarFn regularized_ll(const Problem& problem, VecView x, double mu1, double mu2) {
  return [&problem, x, mu1, mu2](VecView y) {
    return problem.eval_f(x, y) + 0.5 * mu1 * kernels::dot(y, y) + mu2;
  };
}

VectorFn regularized_ll_grad(const Problem& problem, VecView x, double mu1) {
  return [&problem, x, mu1](VecView y) {
    Vec g = problem.grad_f_y(x, y);
    kernels::axpy(mu1, y, g);
    return g;
  };
}

ScalarFn barrier_fn(const Problem& problem, VecView x, double f_reg, double theta, double tau) {
  return [&problem, x, f_reg, theta, tau](VecView y) {
    const double gap = f_reg - problem.eval_f(x, y);
    if (!(gap > 0.0)) return kInf;
    return problem.eval_F(x, y) + 0.5 * theta * kernels::dot(y, y) - tau * std::log(gap);
  };
}

VectorFn barrier_grad(const Problem& problem, VecView x, double f_reg, double theta, double tau) {
  return [&problem, x, f_reg, theta, tau](VecView y) {
    Vec g = problem.grad_F_y(x, y);
    kernels::axpy(theta, y, g);
    const double gap = f_reg - problem.eval_f(x, y);
    kernels::axpy(tau / gap, problem.grad_f_y(x, y), g);
    return g;
  };
}

double grid_fstar_mu(const Problem& problem, VecView x, double mu1, double mu2, const GridSpec& grid) {
  const auto values = evaluate_grid(grid, regularized_ll(problem, x, mu1, mu2));
  return values[argmin(values)];
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

}  // namespace

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (std::size_t a = 0; a < dims(); ++a) n *= points_per_dim;
  return n;
}

double GridSpec::spacing(std::size_t axis) const {
  return (hi[axis] - lo[axis]) / static_cast<double>(points_per_dim - 1);
}

Vec GridSpec::point(std::size_t index) const {
  Vec p(dims());
  const auto idx = unravel(*this, index);
  for (std::size_t a = 0; a < dims(); ++a) {
    // Last point pinned to hi exactly.
    p[a] = idx[a] + 1 == points_per_dim ? hi[a] : lo[a] + static_cast<double>(idx[a]) * spacing(a);
  }
  return p;
}

void GridSpec::validate() const {
  if (dims() < 1 || dims() > 2) throw Error(ErrorKind::Grid, "grid: dimension must be 1 or 2");
  if (hi.size() != lo.size()) throw Error(ErrorKind::Grid, "grid: lo and hi differ in length");
  for (std::size_t a = 0; a < dims(); ++a)
    if (!(hi[a] > lo[a])) throw Error(ErrorKind::Grid, "grid: hi must exceed lo on every axis");
  if (points_per_dim < 3) throw Error(ErrorKind::Grid, "grid: need at least 3 points per axis");
  if (static_cast<double>(points_per_dim) > std::pow(1e7, 1.0 / static_cast<double>(dims())) + 0.5)
    throw Error(ErrorKind::Grid, "grid: more than 1e7 points");
}

Vec fd_gradient(const ScalarFn& fn, VecView x, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::Config, "fd_gradient: h must be positive");
  Vec g(x.size());
  Vec xp(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + step;
    const double up = fn(xp);
    xp[i] = x[i] - step;
    const double down = fn(xp);
    xp[i] = x[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

double relative_error(VecView a, VecView b, double floor) {
  Vec d(a.begin(), a.end());
  kernels::axpy(-1.0, b, d);
  return kernels::norm2(d) / std::max(kernels::norm2(b), floor);
}

LocalMin minimize_local(const ScalarFn& value, const VectorFn& grad, VecView y0, double tol,
                        std::size_t max_iter) {
  LocalMin out;
  out.y.assign(y0.begin(), y0.end());
  out.value = value(out.y);
  if (!std::isfinite(out.value)) return out;
  Vec g = grad(out.y);
  double gn = kernels::norm2(g);
  double t = 1.0 / std::max(1.0, gn);
  Vec trial(out.y.size());
  Vec s(out.y.size());
  Vec dg(out.y.size());
  for (; out.iterations < max_iter; ++out.iterations) {
    if (gn <= tol) break;
    bool moved = false;
    for (int halving = 0; halving < 80 && !moved; ++halving, t *= 0.5) {
      std::copy(out.y.begin(), out.y.end(), trial.begin());
      kernels::axpy(-t, g, trial);
      const double v = value(trial);
      if (!std::isfinite(v)) continue;
      const bool armijo = v <= out.value - 1e-4 * t * gn * gn;
      // Near the optimum the value stalls at round-off; accept steps that
      // still shrink the gradient.
      Vec gt;
      if (!armijo) {
        if (v > out.value + 1e-14 * std::abs(out.value)) continue;
        gt = grad(trial);
        if (!(kernels::norm2(gt) < gn)) continue;
      } else {
        gt = grad(trial);
      }
      for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = trial[i] - out.y[i];
        dg[i] = gt[i] - g[i];
      }
      out.y = trial;
      out.value = v;
      g = std::move(gt);
      gn = kernels::norm2(g);
      moved = true;
    }
    if (!moved) break;
    // Barzilai-Borwein step for the next iteration.
    const double sy = kernels::dot(s, dg);
    t = sy > 0.0 ? kernels::dot(s, s) / sy : 2.0 * t;
    t = std::clamp(t, 1e-20, 1e20);
  }
  out.grad_norm = gn;
  out.converged = gn <= tol;
  return out;
}

LocalMin solve_fstar_mu_local(const Problem& problem, VecView x, double mu1, double mu2, VecView z0,
                              double tol) {
  return minimize_local(regularized_ll(problem, x, mu1, mu2), regularized_ll_grad(problem, x, mu1), z0,
                        tol);
}

BarrierValue barrier_value_local(const Problem& problem, VecView x, const Regularization& reg,
                                 VecView z0, VecView y0, double tol) {
  BarrierValue out;
  const LocalMin z = solve_fstar_mu_local(problem, x, reg.mu1, reg.mu2, z0, tol);
  out.z = z.y;
  out.f_reg = z.value;
  const auto value = barrier_fn(problem, x, out.f_reg, reg.theta, reg.tau);
  const auto grad = barrier_grad(problem, x, out.f_reg, reg.theta, reg.tau);
  VecView start = std::isfinite(value(y0)) ? y0 : VecView(out.z);
  const LocalMin y = minimize_local(value, grad, start, tol);
  out.y = y.y;
  out.value = y.value;
  out.converged = z.converged && y.converged;
  return out;
}

GridMin grid_min(const GridSpec& grid, const ScalarFn& fn) {
  const auto values = evaluate_grid(grid, fn);
  GridMin out;
  out.index = argmin(values);
  out.value = values[out.index];
  out.y = grid.point(out.index);
  return out;
}

BrutePhi brute_phi(const Problem& problem, VecView x, const GridSpec& grid) {
  if (problem.dim_y != grid.dims())
    throw Error(ErrorKind::Grid, "brute_phi: grid dimension differs from dim_y");
  const auto f = evaluate_grid(grid, [&](VecView y) { return problem.eval_f(x, y); });
  const std::size_t best = argmin(f);
  if (on_boundary(grid, best))
    throw Error(ErrorKind::Grid, "brute_phi: lower-level minimum on the grid boundary; widen the grid");
  double slope = 0.0;
  double spacing = 0.0;
  for (std::size_t a = 0; a < grid.dims(); ++a) spacing = std::max(spacing, grid.spacing(a));
  for (std::size_t n : neighbours(grid, best)) slope = std::max(slope, std::abs(f[n] - f[best]) / spacing);

  BrutePhi out;
  out.fstar = f[best];
  out.tol_f = 1e-6 + slope * spacing;
  out.value = kInf;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] > out.fstar + out.tol_f) continue;
    ++out.members;
    out.value = std::min(out.value, problem.eval_F(x, grid.point(i)));
  }

  const ScalarFn ll = [&](VecView y) { return problem.eval_f(x, y); };
  const VectorFn ll_grad = [&](VecView y) { return problem.grad_f_y(x, y); };
  std::vector<LocalMin> polished;
  double fbest = kInf;
  for (std::size_t i : grid_local_minima(grid, f)) {
    polished.push_back(minimize_local(ll, ll_grad, grid.point(i), 1e-12));
    fbest = std::min(fbest, polished.back().value);
  }
  out.refined = kInf;
  for (const LocalMin& m : polished)
    if (m.value <= fbest + 1e-10 * (1.0 + std::abs(fbest)))
      out.refined = std::min(out.refined, problem.eval_F(x, m.y));
  return out;
}

double brute_fstar(const Problem& problem, VecView x, const GridSpec& grid) {
  return brute_fstar_mu(problem, x, 0.0, 0.0, grid);
}

double brute_fstar_mu(const Problem& problem, VecView x, double mu1, double mu2, const GridSpec& grid) {
  const GridMin g = grid_min(grid, regularized_ll(problem, x, mu1, mu2));
  const LocalMin refined = solve_fstar_mu_local(problem, x, mu1, mu2, g.y, 1e-12);
  return std::min(g.value, refined.value);
}

double brute_psi(const Problem& problem, VecView x, double mu1, double mu2, const GridSpec& grid) {
  const double fmu = brute_fstar_mu(problem, x, mu1, mu2, grid);
  const auto f = evaluate_grid(grid, [&](VecView y) { return problem.eval_f(x, y); });
  double best = kInf;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = f[i] - fmu;
    if (d < -1.0 || d > 0.0) continue;
    best = std::min(best, problem.eval_F(x, grid.point(i)));
  }
  if (!std::isfinite(best)) throw Error(ErrorKind::Grid, "brute_psi: no grid point in the relaxed set");
  return best;
}

std::optional<double> phi_k_global(const Problem& problem, VecView x, const Regularization& reg,
                                   const GridSpec& grid_y) {
  const double f_reg = brute_fstar_mu(problem, x, reg.mu1, reg.mu2, grid_y);
  const auto f = evaluate_grid(grid_y, [&](VecView y) { return problem.eval_f(x, y); });
  const auto value = barrier_fn(problem, x, f_reg, reg.theta, reg.tau);
  const auto grad = barrier_grad(problem, x, f_reg, reg.theta, reg.tau);
  const ScalarFn ll = [&](VecView y) { return problem.eval_f(x, y); };
  const VectorFn ll_grad = [&](VecView y) { return problem.grad_f_y(x, y); };

  std::optional<double> best;
  for (std::size_t i : grid_local_minima(grid_y, f)) {
    const LocalMin seed = minimize_local(ll, ll_grad, grid_y.point(i), 1e-12);
    if (!(seed.value < f_reg)) continue;
    const LocalMin y = minimize_local(value, grad, seed.y, 1e-10);
    if (!std::isfinite(y.value)) continue;
    if (!best || y.value < *best) best = y.value;
  }
  return best;
}

LemmaReport check_lemma_fstar(const Problem& problem, const std::vector<Vec>& xs, VecView xbar,
                              const std::vector<Regularization>& mus, const GridSpec& grid_y, double eps) {
  if (xs.size() != mus.size()) throw Error(ErrorKind::Config, "lemma check: sequences differ in length");
  if (xs.size() < 50) throw Error(ErrorKind::Config, "lemma check: need a prefix of at least 50 terms");
  LemmaReport out;
  out.eps = eps;
  out.bound = brute_fstar(problem, xbar, grid_y);
  for (std::size_t k = 0; k < xs.size(); ++k)
    out.values.push_back(brute_fstar_mu(problem, xs[k], mus[k].mu1, mus[k].mu2, grid_y));
  const std::size_t tail = out.values.size() - out.values.size() / 4;
  out.tail_max = *std::max_element(out.values.begin() + static_cast<std::ptrdiff_t>(tail), out.values.end());
  out.passed = out.tail_max <= out.bound + eps;
  return out;
}

EpiReport check_epiconvergence(const Problem& problem, const Schedule& schedule, const GridSpec& grid_x,
                               const GridSpec& grid_y, const std::vector<std::size_t>& stages, double slack,
                               double final_tol) {
  grid_x.validate();
  grid_y.validate();
  if (problem.dim_x != grid_x.dims() || problem.dim_y != grid_y.dims())
    throw Error(ErrorKind::Grid, "epi-convergence: grid dimensions differ from the problem");
  EpiReport out;
  out.grid_points = grid_x.size();
  out.slack = slack;
  out.final_tol = final_tol;

  std::vector<double> phi(grid_x.size());
  for (std::size_t i = 0; i < grid_x.size(); ++i) phi[i] = brute_phi(problem, grid_x.point(i), grid_y).refined;

  std::size_t excluded = 0;
  for (std::size_t k : stages) {
    const Regularization reg = schedule.at(k);
    EpiStage st;
    st.k = k;
    st.tau_ln_mu2 = std::abs(reg.tau * std::log(reg.mu2));
    double best = kInf;
    for (std::size_t i = 0; i < grid_x.size(); ++i) {
      const Vec x = grid_x.point(i);
      std::optional<double> pk;
      try {
        pk = phi_k_global(problem, x, reg, grid_y);
      } catch (const Error&) {
        pk.reset();
      }
      if (!pk) {
        ++st.excluded;
        continue;
      }
      st.upper_gap = std::max(st.upper_gap, *pk - phi[i]);
      st.lower_gap = std::max(st.lower_gap, phi[i] - *pk);
      if (*pk < best) {
        best = *pk;
        st.argmin_x = x[0];
      }
    }
    excluded += st.excluded;
    out.stages.push_back(st);
  }
  out.monotone = true;
  for (std::size_t s = 1; s < out.stages.size(); ++s)
    if (out.stages[s].upper_gap > out.stages[s - 1].upper_gap + slack) out.monotone = false;
  out.final_ok = !out.stages.empty() && out.stages.back().upper_gap <= final_tol;
  out.exclusions_ok = static_cast<double>(excluded) <= 0.01 * static_cast<double>(grid_x.size() * stages.size());
  return out;
}

PropOneReport check_proposition1(const Problem& problem, const Regularization& reg, const std::vector<Vec>& xs,
                                 VecView seed, double h, double inner_tol, double tol) {
  PropOneReport out;
  out.tol = tol;
  for (const Vec& x : xs) {
    const BarrierValue center = barrier_value_local(problem, x, reg, seed, seed, inner_tol);
    OracleCounters counters;
    Oracles oracles(problem, counters);
    PropOnePoint p;
    p.x = x;
    p.analytic = hyper_gradient(oracles, x, center.y, center.z, center.f_reg, reg.tau);
    const ScalarFn phi = [&](VecView xv) {
      return barrier_value_local(problem, xv, reg, center.z, center.y, inner_tol).value;
    };
    p.fd = fd_gradient(phi, x, h);
    p.rel_error = relative_error(p.analytic, p.fd, 1e-3);
    out.max_rel_error = std::max(out.max_rel_error, p.rel_error);
    out.points.push_back(std::move(p));
  }
  out.passed = !out.points.empty() && out.max_rel_error <= tol;
  return out;
}

SandwichReport check_sandwich(const QuadraticProblem& q, const std::vector<Vec>& xs,
                              const std::vector<Regularization>& mus, const GridSpec& grid_y, double tol) {
  SandwichReport out;
  out.worst_lower = kInf;
  out.worst_upper = kInf;
  for (const Vec& x : xs) {
    Vec ystar(q.A.rows);
    kernels::gemv(q.A, x, ystar);
    const double yy = kernels::dot(ystar, ystar);
    for (const Regularization& mu : mus) {
      const double fmu = brute_fstar_mu(q.problem, x, mu.mu1, mu.mu2, grid_y);
      const double lower = fmu - mu.mu2;
      const double upper = 0.5 * mu.mu1 * yy + mu.mu2 - fmu;
      out.worst_lower = std::min(out.worst_lower, lower);
      out.worst_upper = std::min(out.worst_upper, upper);
      if (lower < -tol || upper < -tol) ++out.violations;
      ++out.samples;
    }
  }
  out.passed = out.samples > 0 && out.violations == 0;
  return out;
}

bool check_monotonicity(const Problem& problem, const std::vector<Vec>& xs, const GridSpec& grid_y) {
  const std::vector<double> levels{0.0, 1e-3, 1e-2, 0.1, 1.0};
  for (const Vec& x : xs) {
    double prev = -kInf;
    for (double mu1 : levels) {
      const double v = grid_fstar_mu(problem, x, mu1, 0.1, grid_y);
      if (v < prev) return false;
      prev = v;
    }
    prev = -kInf;
    for (double mu2 : levels) {
      const double v = grid_fstar_mu(problem, x, 0.1, mu2, grid_y);
      if (v < prev) return false;
      prev = v;
    }
  }
  return true;
}

RelaxationReport check_relaxation(const Problem& problem, const Schedule& schedule, const std::vector<Vec>& xs,
                                  const std::vector<std::size_t>& stages, const GridSpec& grid_y) {
  RelaxationReport out;
  out.worst = kInf;
  for (std::size_t k : stages) {
    const Regularization reg = schedule.at(k);
    for (const Vec& x : xs) {
      const auto pk = phi_k_global(problem, x, reg, grid_y);
      const double psi = brute_psi(problem, x, reg.mu1, reg.mu2, grid_y);
      ++out.samples;
      if (!pk) {
        ++out.violations;
        continue;
      }
      out.worst = std::min(out.worst, *pk - psi);
      if (psi > *pk) ++out.violations;
    }
  }
  out.passed = out.samples > 0 && out.violations == 0;
  return out;
}

double schedule_residual(const Schedule& schedule, std::size_t from, std::size_t to) {
  double worst = 0.0;
  for (std::size_t k = from; k <= to; ++k) {
    const Regularization r = schedule.at(k);
    worst = std::max(worst, std::abs(r.tau * std::log(r.mu2)));
  }
  return worst;
}

std::string to_string(Level level) { return level == Level::Quick ? "quick" : "full"; }

Level parse_level(const std::string& text) {
  if (text == "quick") return Level::Quick;
  if (text == "full") return Level::Full;
  throw Error(ErrorKind::Config, "unknown verification level '" + text + "' (expected quick or full)");
}

namespace {

using nlohmann::json;

json vec_json(VecView v) { return json(std::vector<double>(v.begin(), v.end())); }

json prop1_json(const PropOneReport& r) {
  json points = json::array();
  for (const auto& p : r.points)
    points.push_back({{"x", vec_json(p.x)}, {"analytic", vec_json(p.analytic)}, {"fd", vec_json(p.fd)},
                      {"rel_error", p.rel_error}});
  return {{"passed", r.passed}, {"max_rel_error", r.max_rel_error}, {"tol", r.tol}, {"points", points}};
}

// Regularization used by the Proposition 1 checks: large enough that both
// inner problems are well conditioned and have isolated minimizers.
constexpr Regularization kProp1Reg{1.0, 0.5, 1.0, 0.5};

}  // namespace

json run_suite(Level level) {
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  json checks = json::array();
  auto add = [&](const std::string& id, json body) {
    body["id"] = id;
    checks.push_back(std::move(body));
  };

  const Problem toy = make_toy(0.0);
  const QuadraticProblem quad = make_random_quadratic(3, 2, 11);
  const QuadraticProblem quad2 = make_random_quadratic(2, 2, 12);
  const Schedule schedule;  // geometric defaults

  {
    std::vector<Vec> xs;
    for (double x : linspace(-2.0, 4.0, 20)) xs.push_back({x});
    add("prop1_toy", prop1_json(check_proposition1(toy, kProp1Reg, xs, Vec{0.0})));
  }
  {
    Rng rng(7);
    std::vector<Vec> xs;
    for (int i = 0; i < 20; ++i) xs.push_back({rng.normal(), rng.normal()});
    add("prop1_quadratic", prop1_json(check_proposition1(quad.problem, kProp1Reg, xs, Vec(3, 0.0))));
  }

  const GridSpec grid2{{-4.0, -4.0}, {4.0, 4.0}, 401};
  std::vector<Vec> xs2;
  {
    Rng rng(5);
    for (int i = 0; i < 10; ++i) xs2.push_back({2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0});
  }
  {
    const std::vector<Regularization> mus{{1.0, 1.0, 1.0, 1.0}, {0.1, 0.01, 1.0, 1.0}, {1e-3, 1e-4, 1.0, 1.0},
                                          {0.5, 0.0, 1.0, 1.0}};
    const SandwichReport r = check_sandwich(quad2, xs2, mus, grid2, 1e-9);
    add("sandwich", {{"passed", r.passed},
                     {"samples", r.samples},
                     {"violations", r.violations},
                     {"worst_lower_margin", r.worst_lower},
                     {"worst_upper_margin", r.worst_upper}});
  }
  {
    const GridSpec grid1{{-8.0}, {8.0}, 4001};
    std::vector<Vec> xs1;
    for (double x : linspace(-2.0, 4.0, 10)) xs1.push_back({x});
    const bool ok = check_monotonicity(quad2.problem, xs2, grid2) && check_monotonicity(toy, xs1, grid1);
    add("monotonicity", {{"passed", ok}});
  }
  {
    const double r = schedule_residual(schedule, 2000, 20000);
    add("schedule", {{"passed", r <= 1e-3}, {"max_tau_ln_mu2", r}, {"from", 2000}, {"to", 20000}, {"tol", 1e-3}});
  }

  if (level == Level::Full) {
    const GridSpec grid_toy{{-8.0}, {8.0}, 4001};
    {
      std::vector<Vec> xs;
      std::vector<Regularization> mus;
      for (std::size_t k = 1; k <= 1200; ++k) {
        xs.push_back({-std::numbers::pi / 4.0 + 1.0 / static_cast<double>(k)});
        mus.push_back(schedule.at(k));
      }
      const LemmaReport r = check_lemma_fstar(toy, xs, Vec{-std::numbers::pi / 4.0}, mus, grid_toy);
      add("lemma1_toy", {{"passed", r.passed}, {"tail_max", r.tail_max}, {"bound", r.bound}, {"eps", r.eps},
                         {"terms", r.values.size()}});
    }
    {
      std::vector<Vec> xs(1200, xs2.front());
      std::vector<Regularization> mus;
      for (std::size_t k = 1; k <= 1200; ++k) mus.push_back(schedule.at(k));
      const LemmaReport r = check_lemma_fstar(quad2.problem, xs, xs2.front(), mus, grid2);
      bool decreasing = true;
      for (std::size_t k = 1; k < r.values.size(); ++k)
        if (r.values[k] > r.values[k - 1]) decreasing = false;
      add("lemma1_quadratic", {{"passed", r.passed && decreasing},
                               {"tail_max", r.tail_max},
                               {"bound", r.bound},
                               {"eps", r.eps},
                               {"monotone", decreasing}});
    }
    {
      std::vector<Vec> xs;
      for (double x : linspace(-2.0, 4.0, 20)) xs.push_back({x});
      const RelaxationReport r = check_relaxation(toy, schedule, xs, {0, 100, 300, 500}, GridSpec{{-8.0}, {8.0}, 20001});
      add("relaxation", {{"passed", r.passed},
                         {"samples", r.samples},
                         {"violations", r.violations},
                         {"worst_margin", r.worst}});
    }
    {
      const EpiReport r = check_epiconvergence(toy, schedule, GridSpec{{-2.0}, {4.0}, 121},
                                               GridSpec{{-8.0}, {8.0}, 40001}, {0, 500, 1000, 2000});
      json stages = json::array();
      for (const auto& s : r.stages)
        stages.push_back({{"k", s.k},
                          {"upper_gap", s.upper_gap},
                          {"lower_gap", s.lower_gap},
                          {"tau_ln_mu2", s.tau_ln_mu2},
                          {"argmin_x", s.argmin_x},
                          {"excluded", s.excluded}});
      add("epiconvergence", {{"passed", r.passed()},
                             {"monotone", r.monotone},
                             {"final_ok", r.final_ok},
                             {"exclusions_ok", r.exclusions_ok},
                             {"slack", r.slack},
                             {"final_tol", r.final_tol},
                             {"stages", stages}});
    }
  }

  bool all = true;
  json failed = json::array();
  for (const auto& c : checks)
    if (!c["passed"].get<bool>()) {
      all = false;
      failed.push_back(c["id"]);
    }
  const double seconds = std::chrono::duration<double>(Clock::now() - started).count();
  return {{"level", to_string(level)}, {"passed", all}, {"failed", failed}, {"checks", checks}, {"seconds", seconds}};
}

}  // namespace bvfim::verify
