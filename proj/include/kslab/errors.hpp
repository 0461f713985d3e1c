#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kslab {

/// Bad parameters, bad configuration, violated preconditions, failed
/// hypothesis guards.  The CLI maps this family to exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Failures occurring while a computation runs (blow-up, lost front,
/// non-convergence).  The CLI maps this family to exit code 1.
struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solution exceeded the configured cap; carries the time and the profile.
struct BlowupError : RuntimeFailure {
  double t;
  std::vector<double> profile;
  BlowupError(double t_, std::vector<double> profile_, const std::string& msg)
      : RuntimeFailure(msg), t(t_), profile(std::move(profile_)) {}
};

/// Iteration or time budget exhausted before reaching the tolerance.
struct ConvergenceError : RuntimeFailure {
  using RuntimeFailure::RuntimeFailure;
};

/// A computed quantity contradicts a structural guarantee of the scheme;
/// signals a discretization fault rather than a bad input.
struct DiscretizationFault : RuntimeFailure {
  using RuntimeFailure::RuntimeFailure;
};

}  // namespace kslab
