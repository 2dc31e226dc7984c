#include "bvfim/error.hpp"

namespace bvfim {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Capability: return "capability";
    case ErrorKind::DivergedInner: return "diverged-inner";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::InfeasibleStart: return "infeasible-start";
    case ErrorKind::BarrierDomain: return "barrier-domain";
    case ErrorKind::BacktrackExhausted: return "backtrack-exhausted";
    case ErrorKind::Grid: return "grid";
    case ErrorKind::Verification: return "verification";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Capability:
      return 2;
    case ErrorKind::DivergedInner:
    case ErrorKind::NonFinite:
    case ErrorKind::InfeasibleStart:
    case ErrorKind::BarrierDomain:
    case ErrorKind::BacktrackExhausted:
      return 3;
    case ErrorKind::Grid:
    case ErrorKind::Verification:
      return 4;
    case ErrorKind::Io:
      return 5;
  }
  return 1;
}

}  // namespace bvfim
