#pragma once

#include "kslab/grid.hpp"
#include "kslab/params.hpp"

namespace kslab {

/// Extension of grid data to the whole line for the kernel integrals:
/// constant on the left; zero, constant, or exponential on the right
/// (amplitude matched at the right endpoint).
struct TailModel {
  enum class Right { Zero, Constant, Exponential };

  double left_value = 0.0;
  Right right = Right::Zero;
  double right_rate = 0.0;  ///< decay rate, > 0 when Right::Exponential

  static TailModel zero() { return TailModel{}; }
  static TailModel constant(double left) {
    return TailModel{left, Right::Constant, 0.0};
  }
  static TailModel front(double left, double rate) {
    return TailModel{left, Right::Exponential, rate};
  }
};

/// Chemical concentration induced by a density u, with its first derivative
/// and the second derivative recovered from the quasi-static balance
/// psi_xx = lambda*psi - tau*c*psi_x - mu*u.
struct PsiField {
  GridFunction psi;
  GridFunction psi_x;
  GridFunction psi_xx;
  DecayRates rates;
};

/// psi(x) = mu*B*( e^{-lambda1 x} int_{-inf}^{x} e^{lambda1 y} u dy
///               + e^{lambda2 x} int_{x}^{inf} e^{-lambda2 y} u dy ).
/// Evaluated in O(n) by forward/backward recurrences with exact integration
/// of the exponential weight against the linear interpolant of u.
/// Rejects non-finite or negative input and dx*lambda1 > 50.
GridFunction psi(const GridFunction& u, const TailModel& tails,
                 const SystemParams& p, double c);

/// Same transform with weights (-lambda1, +lambda2): the derivative of psi.
GridFunction psi_x(const GridFunction& u, const TailModel& tails,
                   const SystemParams& p, double c);

/// psi, psi_x, and psi_xx in one pass over the recurrences.
PsiField psi_field(const GridFunction& u, const TailModel& tails,
                   const SystemParams& p, double c);

/// lambda*psi - tau*c*psi_x - mu*u on the common grid.
GridFunction psi_xx_from_identity(const GridFunction& psi, const GridFunction& psi_x,
                                  const GridFunction& u, const SystemParams& p, double c);

struct SuperSolutionCheck {
  GridFunction functional;  ///< chi*kappa*psi_x - chi*psi_xx
  GridFunction bound;       ///< chi*mu*(B*((tau*c+kappa)*lambda2 - lambda)_+/(lambda2+kappa) + 1)*M*e^{-kappa x}
  double max_excess;        ///< max over nodes of functional - bound
  double slack;             ///< tolerance used by the certificate
  bool certified;           ///< max_excess <= slack
};

/// Evaluates the drift-diffusion functional of the chemical field and
/// certifies the closed-form exponential bound at every node.  Requires
/// 0 <= u <= M*e^{-kappa x} on the grid (first offending node reported) and
/// tails compatible with that envelope.  kappa = 0 is allowed and reduces
/// the bound to chi*mu*M.
SuperSolutionCheck super_solution_check(const GridFunction& u, const TailModel& tails,
                                        const SystemParams& p, double c,
                                        double kappa, double M);

}  // namespace kslab
