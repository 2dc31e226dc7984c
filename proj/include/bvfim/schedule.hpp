#pragma once

#include <cstddef>
#include <string>

namespace bvfim {

enum class ScheduleMode {
  Fixed,        // base values at every stage
  Geometric,    // every value is base / decay^k
  AdaptiveMu2,  // (mu1, theta, tau) geometric; mu2 = f(x, y) + mu2_offset
};

std::string to_string(ScheduleMode mode);
ScheduleMode parse_schedule_mode(const std::string& text);

struct Regularization {
  double mu1 = 1.0;
  double mu2 = 1.0;
  double theta = 1.0;
  double tau = 1.0;
};

/// Regularization sequence (mu_{k,1}, mu_{k,2}, theta_k, tau_k). The
/// geometric default satisfies (mu, theta, tau) -> 0 and tau_k ln mu_{k,2} -> 0.
struct Schedule {
  ScheduleMode mode = ScheduleMode::Geometric;
  Regularization base;
  double decay = 1.01;
  double mu2_offset = 1.0;
  double mu2_min = 1e-12;  // lower clamp for the adaptive mu2

  /// Values at stage k. In AdaptiveMu2 mode mu2 is base.mu2 / decay^k here;
  /// the solver replaces it with adaptive_mu2(f) at run time.
  Regularization at(std::size_t k) const;
  double adaptive_mu2(double f_value) const;

  /// Throws Error(Config) on non-positive base values or decay < 1.
  void validate() const;
};

}  // namespace bvfim
