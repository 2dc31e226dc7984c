#pragma once

// Sectioned key-value run configuration:
//
//   schema_version = 1
//   [problem]
//   id = toy(a=0)
//   [solver]
//   id = bvfim
//   T_z = 50
//   [schedule]
//   mode = geometric
//   [run]
//   K = 500
//   x0 = 3
//
// '#' and ';' start comments. Unknown keys, duplicates and malformed values
// are errors carrying "origin:line:col".

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bvfim/baselines.hpp"
#include "bvfim/bvfim.hpp"
#include "bvfim/problems.hpp"
#include "bvfim/schedule.hpp"

namespace bvfim {

inline constexpr int kSchemaVersion = 1;

/// Parsed "name(key=value, ...)" problem selector.
struct ProblemId {
  std::string family;  // toy | quadratic | hyperclean
  std::map<std::string, std::string> params;

  std::string to_string() const;
};

/// Throws Error(Config) on malformed text or parameters the family does
/// not know.
ProblemId parse_problem_id(const std::string& text);

enum class SolverKind { Bvfim, Rhg, Trhg, Cg, Neumann };

std::string to_string(SolverKind kind);
SolverKind parse_solver_kind(const std::string& text);

struct RunSpec {
  int schema_version = kSchemaVersion;
  ProblemId problem{"toy", {}};
  bool fd_second_order = false;
  double fd_rel_step = 1e-6;
  SolverKind solver = SolverKind::Bvfim;
  SolverConfig bvfim;
  BaselineConfig baseline;
  Schedule schedule;
  std::uint64_t seed = 0;
  std::optional<Vec> x0;  // a single value broadcasts to every coordinate
  std::optional<Vec> y0;
  std::filesystem::path output_dir = "runs";
};

/// Parses and validates a spec; `origin` prefixes error locations.
RunSpec parse_runspec(const std::string& text, const std::string& origin = "<spec>");
RunSpec load_runspec(const std::filesystem::path& path);

/// Canonical text: every key in registry order with its effective value.
/// Two specs with the same canonical text run identically.
std::string canonical_text(const RunSpec& spec);

/// fnv1a_hex of canonical_text, excluding output_dir.
std::string spec_hash(const RunSpec& spec);

struct KeyInfo {
  std::string section;  // empty for top-level keys
  std::string key;
  std::string type;
  std::string default_value;
  std::string help;
};

/// Every key accepted by parse_runspec, in documentation order.
const std::vector<KeyInfo>& runspec_keys();

/// Problem plus whatever the runner needs to report on it.
struct BuiltProblem {
  Problem problem;
  std::optional<QuadraticProblem> quadratic;
  std::optional<HyperCleanProblem> hyperclean;
  Vec x0;
  Vec y0;
};

/// Instantiates the problem with default or spec-supplied initial points.
BuiltProblem build_problem(const RunSpec& spec);

}  // namespace bvfim
