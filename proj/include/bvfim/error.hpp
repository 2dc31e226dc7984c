#pragma once

#include <stdexcept>
#include <string>

namespace bvfim {

enum class ErrorKind {
  Config,              // malformed or invalid run configuration
  Capability,          // problem lacks an oracle the solver needs
  DivergedInner,       // non-finite value inside an inner solve
  NonFinite,           // non-finite objective/gradient elsewhere
  InfeasibleStart,     // barrier solve started outside the log domain
  BarrierDomain,       // hypergradient requested outside the log domain
  BacktrackExhausted,  // step halving could not restore feasibility/descent
  Grid,                // brute-force grid too coarse or empty
  Verification,        // a numeric check failed
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Process exit code for a failure of the given kind.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bvfim
