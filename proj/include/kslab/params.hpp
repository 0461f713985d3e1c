#pragma once

#include "kslab/errors.hpp"

namespace kslab {

/// Constants of the chemotaxis-growth system.  All rates are positive except
/// tau, which may be zero (instantaneous chemical relaxation).
struct SystemParams {
  double chi = 0.3;    ///< chemotactic sensitivity, >= 0 (0 decouples the chemical)
  double mu = 1.0;     ///< chemical production rate, > 0
  double lambda = 1.0; ///< chemical degradation rate, > 0
  double a = 1.0;      ///< intrinsic growth rate, > 0
  double b = 1.0;      ///< logistic self-limitation, > 0
  double tau = 1.0;    ///< chemical relaxation time, >= 0

  void validate() const;

  /// Uniform population bound a/(b - chi*mu); meaningful under b > chi*mu.
  double uniform_bound() const { return a / (b - chi * mu); }
};

/// Exponential rates and amplitude of the two-sided kernel at frame speed c.
/// lambda2 and -lambda1 are the roots of m^2 + tau*c*m - lambda = 0, so
/// lambda1*lambda2 = lambda and lambda1 + lambda2 = 1/B.
struct DecayRates {
  double c;
  double lambda1;  ///< rate of the left factor, (tau*c + sqrt(4*lambda + tau^2 c^2))/2
  double lambda2;  ///< rate of the right factor, lambda/lambda1
  double B;        ///< amplitude, 1/sqrt(4*lambda + tau^2 c^2)
};

/// Rejects c <= 0.
DecayRates decay_rates(const SystemParams& p, double c);

/// Same formulas extended continuously to the lab frame: c = 0 gives
/// lambda1 = lambda2 = sqrt(lambda), B = 1/(2*sqrt(lambda)).  Rejects c < 0.
DecayRates frame_rates(const SystemParams& p, double c);

/// c_kappa = (a + kappa^2)/kappa.  Accepts 0 < kappa <= sqrt(a); decreasing
/// in kappa with minimum value 2*sqrt(a) at the right endpoint.
double speed_of_kappa(double a, double kappa);

/// Smaller root of kappa^2 - c*kappa + a = 0; requires c > 2*sqrt(a).
/// Inverse of speed_of_kappa on the open branch.
double kappa_of_speed(double a, double c);

/// Supremand whose supremum over 0 < kappa < sqrt(a) defines b_star:
/// 1 + lambda2*(kappa - lambda2)_+ / ((lambda1 + lambda2)*(kappa + lambda2)),
/// rates evaluated at c = c_kappa.  Extends continuously to kappa = sqrt(a).
double b_star_supremand(const SystemParams& p, double kappa);

/// Supremum of b_star_supremand; always in [1, 2].  Grid scan plus
/// golden-section refinement of the bracketing cell.
double b_star(const SystemParams& p);

/// Largest kappa in (0, sqrt(a)] with lambda1(c_kappa) >= kappa; closed form
/// min{sqrt(a), sqrt((lambda + tau*a)/(1 - tau))}, saturating at sqrt(a)
/// when tau >= 1.
double kappa_star(const SystemParams& p);

/// kappa_star recovered from its defining threshold by bisection on the
/// strictly decreasing map kappa -> lambda1(c_kappa) - kappa.
double kappa_star_from_sup(const SystemParams& p);

/// kappa_star + a/kappa_star; exactly 2*sqrt(a) in the saturated branch.
double c_star(const SystemParams& p);

struct Thresholds {
  double kappa_star = 0.0;
  double c_star = 0.0;
  double b_star = 0.0;
};

Thresholds thresholds(const SystemParams& p);

/// Smallness conditions on chi*mu relative to b, plus the tau threshold:
///   h1: b > chi*mu
///   h2: b > b_star * chi*mu
///   h3: b > 2*chi*mu
///   h4: tau >= (1 - lambda/a)_+ / 2
/// h3 implies h2 implies h1 (b_star is clamped into [1, 2]).
struct Hypotheses {
  bool h1 = false, h2 = false, h3 = false, h4 = false;
};

Hypotheses check_hypotheses(const SystemParams& p);

}  // namespace kslab
