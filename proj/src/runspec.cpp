#include "bvfim/runspec.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "bvfim/error.hpp"
#include "bvfim/trace.hpp"

namespace bvfim {
namespace {

struct Location {
  std::string origin;
  std::size_t line = 0;
  std::size_t col = 0;

  std::string str() const { return origin + ":" + std::to_string(line) + ":" + std::to_string(col); }
};

[[noreturn]] void fail(const Location& at, const std::string& message) {
  throw Error(ErrorKind::Config, at.str() + ": " + message);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Value parsers throw std::invalid_argument with a short reason; the caller
// adds the location.
std::uint64_t to_uint(const std::string& text) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || text.empty())
    throw std::invalid_argument("expected a non-negative integer, got '" + text + "'");
  return v;
}

double to_real(const std::string& text) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || text.empty() || !std::isfinite(v))
    throw std::invalid_argument("expected a finite real number, got '" + text + "'");
  return v;
}

bool to_bool(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw std::invalid_argument("expected true or false, got '" + text + "'");
}

Vec to_list(const std::string& text) {
  Vec out;
  std::stringstream ss(text);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(to_real(trim(cell)));
  if (out.empty()) throw std::invalid_argument("expected a comma-separated list of reals");
  return out;
}

std::string list_text(const Vec& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

// --- problem families -----------------------------------------------------

struct ParamInfo {
  std::string name;
  std::string default_value;
  std::function<void(const std::string&)> check;
};

const std::vector<ParamInfo>& family_params(const std::string& family) {
  static const auto uint_check = [](const std::string& v) { to_uint(v); };
  static const auto real_check = [](const std::string& v) { to_real(v); };
  static const std::map<std::string, std::vector<ParamInfo>> table{
      {"toy", {{"a", "0", real_check}}},
      {"quadratic", {{"n", "10", uint_check}, {"m", "5", uint_check}, {"seed", "0", uint_check}}},
      {"hyperclean",
       {{"d", "20", uint_check},
        {"classes", "3", uint_check},
        {"arch", "linear", [](const std::string& v) { parse_arch(v); }},
        {"seed", "0", uint_check},
        {"n_tr", "300", uint_check},
        {"n_val", "300", uint_check},
        {"n_test", "600", uint_check},
        {"hidden", "16", uint_check},
        {"separation", "3", real_check}}},
  };
  const auto it = table.find(family);
  if (it == table.end())
    throw std::invalid_argument("unknown problem '" + family + "' (expected toy, quadratic or hyperclean)");
  return it->second;
}

std::string canonical_param(const std::string& name, const std::string& value) {
  if (name == "a" || name == "separation") return format_double(to_real(value));
  if (name == "arch") return to_string(parse_arch(value));
  return std::to_string(to_uint(value));
}

std::uint64_t param_uint(const ProblemId& id, const std::string& name) { return to_uint(id.params.at(name)); }
double param_real(const ProblemId& id, const std::string& name) { return to_real(id.params.at(name)); }

// --- key registry --------------------------------------------------------

struct Key {
  KeyInfo info;
  std::function<void(RunSpec&, const std::string&)> set;
  std::function<std::string(const RunSpec&)> get;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    auto add = [&](std::string section, std::string key, std::string type, std::string def, std::string help,
                   std::function<void(RunSpec&, const std::string&)> set,
                   std::function<std::string(const RunSpec&)> get) {
      k.push_back({{std::move(section), std::move(key), std::move(type), std::move(def), std::move(help)},
                   std::move(set), std::move(get)});
    };
    auto sz = [](const std::string& v) { return static_cast<std::size_t>(to_uint(v)); };
    const RunSpec d;

    add("", "schema_version", "int", "1", "config schema version; must be 1",
        [](RunSpec& s, const std::string& v) {
          if (to_uint(v) != static_cast<std::uint64_t>(kSchemaVersion))
            throw std::invalid_argument("unsupported schema_version " + v + " (this build reads 1)");
          s.schema_version = kSchemaVersion;
        },
        [](const RunSpec& s) { return std::to_string(s.schema_version); });

    add("problem", "id", "problem", "toy(a=0)",
        "toy(a) | quadratic(n, m, seed) | hyperclean(d, classes, arch, seed, n_tr, n_val, n_test, hidden, separation)",
        [](RunSpec& s, const std::string& v) { s.problem = parse_problem_id(v); },
        [](const RunSpec& s) { return s.problem.to_string(); });
    add("problem", "fd_second_order", "bool", "false",
        "attach central-difference Hessian/Jacobian products so baselines can run",
        [](RunSpec& s, const std::string& v) { s.fd_second_order = to_bool(v); },
        [](const RunSpec& s) { return bool_text(s.fd_second_order); });
    add("problem", "fd_rel_step", "real", "1e-06", "relative step of the finite-difference products",
        [](RunSpec& s, const std::string& v) { s.fd_rel_step = to_real(v); },
        [](const RunSpec& s) { return format_double(s.fd_rel_step); });

    add("solver", "id", "solver", "bvfim", "bvfim | rhg | trhg | cg | neumann",
        [](RunSpec& s, const std::string& v) { s.solver = parse_solver_kind(v); },
        [](const RunSpec& s) { return to_string(s.solver); });
    add("solver", "T_z", "int", std::to_string(d.bvfim.T_z), "bvfim: gradient steps of the regularized lower-level solve",
        [sz](RunSpec& s, const std::string& v) { s.bvfim.T_z = sz(v); },
        [](const RunSpec& s) { return std::to_string(s.bvfim.T_z); });
    add("solver", "T_y", "int", std::to_string(d.bvfim.T_y), "bvfim: accepted steps of the barrier solve",
        [sz](RunSpec& s, const std::string& v) { s.bvfim.T_y = sz(v); },
        [](const RunSpec& s) { return std::to_string(s.bvfim.T_y); });
    add("solver", "s1", "real", format_double(d.bvfim.s1), "bvfim: step size of the z solve",
        [](RunSpec& s, const std::string& v) { s.bvfim.s1 = to_real(v); },
        [](const RunSpec& s) { return format_double(s.bvfim.s1); });
    add("solver", "s2", "real", format_double(d.bvfim.s2), "bvfim: initial step size of the y solve",
        [](RunSpec& s, const std::string& v) { s.bvfim.s2 = to_real(v); },
        [](const RunSpec& s) { return format_double(s.bvfim.s2); });
    add("solver", "warm_start_y", "bool", "false", "bvfim: start every y solve from z",
        [](RunSpec& s, const std::string& v) { s.bvfim.warm_start_y = to_bool(v); },
        [](const RunSpec& s) { return bool_text(s.bvfim.warm_start_y); });
    add("solver", "barrier_floor", "real", format_double(d.bvfim.barrier_floor),
        "bvfim: smallest accepted f_reg - f(x, y), in (0, 1e-6]",
        [](RunSpec& s, const std::string& v) { s.bvfim.barrier_floor = to_real(v); },
        [](const RunSpec& s) { return format_double(s.bvfim.barrier_floor); });
    add("solver", "backtrack_max", "int", std::to_string(d.bvfim.backtrack_max),
        "bvfim: step halvings allowed per y step",
        [sz](RunSpec& s, const std::string& v) { s.bvfim.backtrack_max = sz(v); },
        [](const RunSpec& s) { return std::to_string(s.bvfim.backtrack_max); });
    add("solver", "alpha", "real", format_double(d.bvfim.alpha), "outer step size on x",
        [](RunSpec& s, const std::string& v) { s.bvfim.alpha = s.baseline.alpha = to_real(v); },
        [](const RunSpec& s) { return format_double(s.bvfim.alpha); });
    add("solver", "optimizer", "enum", "adam", "outer optimizer: adam | gd",
        [](RunSpec& s, const std::string& v) {
          if (v != "adam" && v != "gd") throw std::invalid_argument("expected adam or gd, got '" + v + "'");
          s.bvfim.optimizer = s.baseline.optimizer = v == "adam" ? OuterOptimizer::Adam : OuterOptimizer::Gd;
        },
        [](const RunSpec& s) { return std::string(s.bvfim.optimizer == OuterOptimizer::Adam ? "adam" : "gd"); });
    add("solver", "adam_beta1", "real", format_double(d.bvfim.adam.beta1), "Adam first-moment decay",
        [](RunSpec& s, const std::string& v) { s.bvfim.adam.beta1 = s.baseline.adam.beta1 = to_real(v); },
        [](const RunSpec& s) { return format_double(s.bvfim.adam.beta1); });
    add("solver", "adam_beta2", "real", format_double(d.bvfim.adam.beta2), "Adam second-moment decay",
        [](RunSpec& s, const std::string& v) { s.bvfim.adam.beta2 = s.baseline.adam.beta2 = to_real(v); },
        [](const RunSpec& s) { return format_double(s.bvfim.adam.beta2); });
    add("solver", "adam_eps", "real", format_double(d.bvfim.adam.eps), "Adam denominator offset",
        [](RunSpec& s, const std::string& v) { s.bvfim.adam.eps = s.baseline.adam.eps = to_real(v); },
        [](const RunSpec& s) { return format_double(s.bvfim.adam.eps); });
    add("solver", "T", "int", std::to_string(d.baseline.unroll.T), "baselines: lower-level gradient steps",
        [sz](RunSpec& s, const std::string& v) { s.baseline.unroll.T = s.baseline.implicit.T = sz(v); },
        [](const RunSpec& s) { return std::to_string(s.baseline.unroll.T); });
    add("solver", "s", "real", format_double(d.baseline.unroll.s),
        "baselines: lower-level step size (also the Neumann damping)",
        [](RunSpec& s, const std::string& v) { s.baseline.unroll.s = s.baseline.implicit.s = to_real(v); },
        [](const RunSpec& s) { return format_double(s.baseline.unroll.s); });
    add("solver", "truncate_at", "int|none", "none", "trhg: reverse steps kept; none means T/2",
        [sz](RunSpec& s, const std::string& v) {
          if (v == "none") s.baseline.unroll.truncate_at.reset();
          else s.baseline.unroll.truncate_at = sz(v);
        },
        [](const RunSpec& s) {
          return s.baseline.unroll.truncate_at ? std::to_string(*s.baseline.unroll.truncate_at) : std::string("none");
        });
    add("solver", "J", "int", std::to_string(d.baseline.implicit.J), "cg / neumann: linear-solve iterations",
        [sz](RunSpec& s, const std::string& v) { s.baseline.implicit.J = sz(v); },
        [](const RunSpec& s) { return std::to_string(s.baseline.implicit.J); });
    add("solver", "cg_rel_tol", "real", format_double(d.baseline.implicit.cg_rel_tol),
        "cg: stop once the residual falls below this fraction of the right-hand side",
        [](RunSpec& s, const std::string& v) { s.baseline.implicit.cg_rel_tol = to_real(v); },
        [](const RunSpec& s) { return format_double(s.baseline.implicit.cg_rel_tol); });
    add("solver", "warm_start", "bool", "true", "baselines: start each lower-level solve from the previous y_T",
        [](RunSpec& s, const std::string& v) { s.baseline.warm_start = to_bool(v); },
        [](const RunSpec& s) { return bool_text(s.baseline.warm_start); });

    add("schedule", "mode", "enum", "geometric", "fixed | geometric | adaptive-mu2",
        [](RunSpec& s, const std::string& v) { s.schedule.mode = parse_schedule_mode(v); },
        [](const RunSpec& s) { return to_string(s.schedule.mode); });
    add("schedule", "mu1", "real", "1", "base mu1",
        [](RunSpec& s, const std::string& v) { s.schedule.base.mu1 = to_real(v); },
        [](const RunSpec& s) { return format_double(s.schedule.base.mu1); });
    add("schedule", "mu2", "real", "1", "base mu2 (ignored by adaptive-mu2)",
        [](RunSpec& s, const std::string& v) { s.schedule.base.mu2 = to_real(v); },
        [](const RunSpec& s) { return format_double(s.schedule.base.mu2); });
    add("schedule", "theta", "real", "1", "base theta",
        [](RunSpec& s, const std::string& v) { s.schedule.base.theta = to_real(v); },
        [](const RunSpec& s) { return format_double(s.schedule.base.theta); });
    add("schedule", "tau", "real", "1", "base tau",
        [](RunSpec& s, const std::string& v) { s.schedule.base.tau = to_real(v); },
        [](const RunSpec& s) { return format_double(s.schedule.base.tau); });
    add("schedule", "decay", "real", "1.01", "geometric divisor per stage",
        [](RunSpec& s, const std::string& v) { s.schedule.decay = to_real(v); },
        [](const RunSpec& s) { return format_double(s.schedule.decay); });
    add("schedule", "mu2_offset", "real", "1", "adaptive-mu2: mu2 = f(x, y) + mu2_offset",
        [](RunSpec& s, const std::string& v) { s.schedule.mu2_offset = to_real(v); },
        [](const RunSpec& s) { return format_double(s.schedule.mu2_offset); });
    add("schedule", "mu2_min", "real", "1e-12", "adaptive-mu2: lower clamp on mu2",
        [](RunSpec& s, const std::string& v) { s.schedule.mu2_min = to_real(v); },
        [](const RunSpec& s) { return format_double(s.schedule.mu2_min); });

    add("run", "K", "int", std::to_string(d.bvfim.K), "outer stages (baselines: outer iterations)",
        [sz](RunSpec& s, const std::string& v) { s.bvfim.K = s.baseline.K = sz(v); },
        [](const RunSpec& s) { return std::to_string(s.bvfim.K); });
    add("run", "L", "int", std::to_string(d.bvfim.L), "bvfim: x updates per stage",
        [sz](RunSpec& s, const std::string& v) { s.bvfim.L = sz(v); },
        [](const RunSpec& s) { return std::to_string(s.bvfim.L); });
    add("run", "seed", "int", "0", "seed for random initial points",
        [](RunSpec& s, const std::string& v) { s.seed = to_uint(v); },
        [](const RunSpec& s) { return std::to_string(s.seed); });
    add("run", "x0", "list", "default", "initial x; one value broadcasts; 'default' uses the problem's",
        [](RunSpec& s, const std::string& v) {
          if (v == "default") s.x0.reset();
          else s.x0 = to_list(v);
        },
        [](const RunSpec& s) { return s.x0 ? list_text(*s.x0) : std::string("default"); });
    add("run", "y0", "list", "default", "initial y; one value broadcasts; 'default' uses the problem's",
        [](RunSpec& s, const std::string& v) {
          if (v == "default") s.y0.reset();
          else s.y0 = to_list(v);
        },
        [](const RunSpec& s) { return s.y0 ? list_text(*s.y0) : std::string("default"); });
    add("run", "record_every", "int", "1", "trace every n-th x update (the last is always kept)",
        [sz](RunSpec& s, const std::string& v) { s.bvfim.record_every = s.baseline.record_every = sz(v); },
        [](const RunSpec& s) { return std::to_string(s.bvfim.record_every); });
    add("run", "output_dir", "path", "runs", "output root; BVFIM_OUTPUT_ROOT overrides",
        [](RunSpec& s, const std::string& v) { s.output_dir = v; },
        [](const RunSpec& s) { return s.output_dir.string(); });
    return k;
  }();
  return table;
}

const Key* find_key(const std::string& section, const std::string& key) {
  for (const Key& k : keys())
    if (k.info.section == section && k.info.key == key) return &k;
  return nullptr;
}

// Validation that needs the whole spec; `at` points at the line to blame.
void validate_spec(const RunSpec& s, const std::map<std::string, Location>& where, const std::string& origin) {
  auto loc = [&](const std::string& qualified) {
    const auto it = where.find(qualified);
    return it != where.end() ? it->second : Location{origin, 0, 0};
  };
  auto check = [&](const std::string& qualified, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      fail(loc(qualified), e.what());
    } catch (const std::exception& e) {
      fail(loc(qualified), e.what());
    }
  };
  check("run.record_every", [&] {
    if (s.bvfim.record_every < 1) throw std::invalid_argument("record_every must be at least 1");
  });
  check("run.L", [&] {
    if (s.bvfim.L < 1) throw std::invalid_argument("L must be at least 1");
  });
  check("solver.T_z", [&] {
    SolverConfig c = s.bvfim;
    c.K = std::max<std::size_t>(c.K, 1);
    c.validate();
  });
  check("schedule.mode", [&] { s.schedule.validate(); });
  if (s.solver != SolverKind::Bvfim) {
    check("solver.T", [&] {
      BaselineConfig c = s.baseline;
      c.K = std::max<std::size_t>(c.K, 1);
      c.validate();
    });
    const bool analytic = s.problem.family == "toy" || s.problem.family == "quadratic";
    if (!analytic && !s.fd_second_order)
      fail(loc("solver.id"), "solver " + to_string(s.solver) + " needs Hessian-vector products, which problem '" +
                                 s.problem.family + "' does not provide; set fd_second_order = true in [problem]");
  }
  check("problem.fd_rel_step", [&] {
    if (!(s.fd_rel_step > 0.0)) throw std::invalid_argument("fd_rel_step must be positive");
  });
  if (s.problem.family == "hyperclean") {
    check("problem.id", [&] {
      HyperCleanOptions o;
      o.d = param_uint(s.problem, "d");
      o.classes = param_uint(s.problem, "classes");
      o.n_tr = param_uint(s.problem, "n_tr");
      o.n_val = param_uint(s.problem, "n_val");
      o.n_test = param_uint(s.problem, "n_test");
      o.hidden = param_uint(s.problem, "hidden");
      if (o.classes < 2 || o.classes > o.d || o.d == 0 || o.n_tr == 0 || o.n_val == 0 || o.hidden == 0)
        throw std::invalid_argument("hyperclean needs 2 <= classes <= d and positive sizes");
    });
  }
  if (s.problem.family == "quadratic") {
    check("problem.id", [&] {
      if (param_uint(s.problem, "n") == 0 || param_uint(s.problem, "m") == 0)
        throw std::invalid_argument("quadratic needs n >= 1 and m >= 1");
    });
  }
}

Vec broadcast(const Vec& v, std::size_t n, const char* name) {
  if (v.size() == n) return v;
  if (v.size() == 1) return Vec(n, v[0]);
  throw Error(ErrorKind::Config, std::string(name) + " has " + std::to_string(v.size()) + " entries; the problem needs " +
                                     std::to_string(n));
}

}  // namespace

std::string ProblemId::to_string() const {
  std::string out = family + "(";
  bool first = true;
  for (const auto& p : family_params(family)) {
    const auto it = params.find(p.name);
    out += (first ? "" : ",") + p.name + "=" + (it != params.end() ? it->second : p.default_value);
    first = false;
  }
  return out + ")";
}

ProblemId parse_problem_id(const std::string& text) {
  const std::string t = trim(text);
  ProblemId id;
  const auto open = t.find('(');
  id.family = trim(t.substr(0, open));
  try {
    const auto& known = family_params(id.family);
    for (const auto& p : known) id.params[p.name] = p.default_value;
    if (open == std::string::npos) return id;
    if (t.back() != ')') throw std::invalid_argument("missing ')' in problem id '" + t + "'");
    const std::string inner = t.substr(open + 1, t.size() - open - 2);
    std::stringstream ss(inner);
    std::set<std::string> seen;
    for (std::string cell; std::getline(ss, cell, ',');) {
      cell = trim(cell);
      if (cell.empty()) continue;
      const auto eq = cell.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("expected name=value in problem id, got '" + cell + "'");
      const std::string name = trim(cell.substr(0, eq));
      const std::string value = trim(cell.substr(eq + 1));
      const auto it = std::find_if(known.begin(), known.end(), [&](const ParamInfo& p) { return p.name == name; });
      if (it == known.end()) throw std::invalid_argument("problem '" + id.family + "' has no parameter '" + name + "'");
      if (!seen.insert(name).second) throw std::invalid_argument("parameter '" + name + "' given twice");
      it->check(value);
      id.params[name] = canonical_param(name, value);
    }
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorKind::Config, e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
  for (auto& [name, value] : id.params) value = canonical_param(name, value);
  return id;
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Bvfim: return "bvfim";
    case SolverKind::Rhg: return "rhg";
    case SolverKind::Trhg: return "trhg";
    case SolverKind::Cg: return "cg";
    case SolverKind::Neumann: return "neumann";
  }
  return "?";
}

SolverKind parse_solver_kind(const std::string& text) {
  if (text == "bvfim") return SolverKind::Bvfim;
  if (text == "rhg") return SolverKind::Rhg;
  if (text == "trhg") return SolverKind::Trhg;
  if (text == "cg") return SolverKind::Cg;
  if (text == "neumann") return SolverKind::Neumann;
  throw std::invalid_argument("unknown solver '" + text + "' (expected bvfim, rhg, trhg, cg or neumann)");
}

RunSpec parse_runspec(const std::string& text, const std::string& origin) {
  RunSpec spec;
  std::map<std::string, Location> where;
  std::set<std::string> sections_seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Strip comments: '#' or ';' at the start or after whitespace.
    for (std::size_t i = 0; i < line.size(); ++i) {
      if ((line[i] == '#' || line[i] == ';') && (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
        line.resize(i);
        break;
      }
    }
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const Location at{origin, lineno, first + 1};
    if (line[first] == '[') {
      const auto close = line.find(']', first);
      if (close == std::string::npos || !trim(line.substr(close + 1)).empty())
        fail(at, "malformed section header");
      section = trim(line.substr(first + 1, close - first - 1));
      if (section != "problem" && section != "solver" && section != "schedule" && section != "run")
        fail(at, "unknown section [" + section + "] (expected problem, solver, schedule or run)");
      if (!sections_seen.insert(section).second) fail(at, "section [" + section + "] appears twice");
      continue;
    }
    const auto eq = line.find('=', first);
    if (eq == std::string::npos) fail(at, "expected key = value");
    const std::string key = trim(line.substr(first, eq - first));
    if (key.empty()) fail(at, "missing key before '='");
    const auto vstart = line.find_first_not_of(" \t", eq + 1);
    const Location value_at{origin, lineno, (vstart == std::string::npos ? eq + 1 : vstart) + 1};
    const std::string value = trim(line.substr(eq + 1));
    const Key* k = find_key(section, key);
    if (!k) {
      fail(at, section.empty() ? "unknown top-level key '" + key + "' (keys belong in a [section])"
                               : "unknown key '" + key + "' in [" + section + "]");
    }
    const std::string qualified = section.empty() ? key : section + "." + key;
    if (const auto it = where.find(qualified); it != where.end())
      fail(at, "duplicate key '" + qualified + "' (first set at " + it->second.str() + ")");
    where[qualified] = at;
    if (value.empty()) fail(value_at, "missing value for '" + qualified + "'");
    try {
      k->set(spec, value);
    } catch (const std::exception& e) {
      fail(value_at, std::string(k->info.key) + ": " + e.what());
    }
  }
  if (!where.count("problem.id")) fail(Location{origin, lineno, 1}, "missing required key 'id' in [problem]");
  validate_spec(spec, where, origin);
  return spec;
}

RunSpec load_runspec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_runspec(ss.str(), path.string());
}

std::string canonical_text(const RunSpec& spec) {
  std::string out;
  std::string section = "\x01";
  for (const Key& k : keys()) {
    if (k.info.section != section) {
      section = k.info.section;
      if (!section.empty()) out += "[" + section + "]\n";
    }
    out += k.info.key + " = " + k.get(spec) + "\n";
  }
  return out;
}

std::string spec_hash(const RunSpec& spec) {
  RunSpec copy = spec;
  copy.output_dir.clear();
  return fnv1a_hex(canonical_text(copy));
}

const std::vector<KeyInfo>& runspec_keys() {
  static const std::vector<KeyInfo> infos = [] {
    std::vector<KeyInfo> out;
    for (const Key& k : keys()) out.push_back(k.info);
    return out;
  }();
  return infos;
}

BuiltProblem build_problem(const RunSpec& spec) {
  BuiltProblem out;
  const ProblemId& id = spec.problem;
  if (id.family == "toy") {
    out.problem = make_toy(param_real(id, "a"));
    out.x0 = {0.0};
    out.y0 = {0.0};
  } else if (id.family == "quadratic") {
    out.quadratic = make_random_quadratic(param_uint(id, "n"), param_uint(id, "m"), param_uint(id, "seed"));
    out.problem = out.quadratic->problem;
    out.x0.assign(out.problem.dim_x, 0.0);
    out.y0.assign(out.problem.dim_y, 0.0);
  } else if (id.family == "hyperclean") {
    HyperCleanOptions o;
    o.d = param_uint(id, "d");
    o.classes = param_uint(id, "classes");
    o.arch = parse_arch(id.params.at("arch"));
    o.seed = param_uint(id, "seed");
    o.n_tr = param_uint(id, "n_tr");
    o.n_val = param_uint(id, "n_val");
    o.n_test = param_uint(id, "n_test");
    o.hidden = param_uint(id, "hidden");
    o.separation = param_real(id, "separation");
    out.hyperclean = make_hyperclean(o);
    out.problem = out.hyperclean->problem;
    out.x0.assign(out.problem.dim_x, 0.0);
    out.y0 = out.hyperclean->initial_y(spec.seed);
  } else {
    throw Error(ErrorKind::Config, "unknown problem '" + id.family + "'");
  }
  if (spec.fd_second_order) out.problem = with_fd_second_order(std::move(out.problem), spec.fd_rel_step);
  if (spec.x0) out.x0 = broadcast(*spec.x0, out.problem.dim_x, "x0");
  if (spec.y0) out.y0 = broadcast(*spec.y0, out.problem.dim_y, "y0");
  return out;
}

}  // namespace bvfim
