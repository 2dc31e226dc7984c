#include "bvfim/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "bvfim/error.hpp"

namespace bvfim {

std::string to_string(ScheduleMode mode) {
  switch (mode) {
    case ScheduleMode::Fixed: return "fixed";
    case ScheduleMode::Geometric: return "geometric";
    case ScheduleMode::AdaptiveMu2: return "adaptive-mu2";
  }
  return "unknown";
}

ScheduleMode parse_schedule_mode(const std::string& text) {
  if (text == "fixed") return ScheduleMode::Fixed;
  if (text == "geometric") return ScheduleMode::Geometric;
  if (text == "adaptive-mu2") return ScheduleMode::AdaptiveMu2;
  throw Error(ErrorKind::Config, "unknown schedule mode '" + text + "'");
}

Regularization Schedule::at(std::size_t k) const {
  if (mode == ScheduleMode::Fixed) return base;
  const double scale = std::pow(decay, -static_cast<double>(k));
  return {base.mu1 * scale, base.mu2 * scale, base.theta * scale, base.tau * scale};
}

double Schedule::adaptive_mu2(double f_value) const { return std::max(f_value + mu2_offset, mu2_min); }

void Schedule::validate() const {
  if (!(base.mu1 > 0 && base.mu2 > 0 && base.theta > 0 && base.tau > 0))
    throw Error(ErrorKind::Config, "schedule: mu1, mu2, theta and tau must be positive");
  if (!(decay >= 1.0)) throw Error(ErrorKind::Config, "schedule: decay must be >= 1");
  if (!(mu2_min > 0)) throw Error(ErrorKind::Config, "schedule: mu2_min must be positive");
}

}  // namespace bvfim
