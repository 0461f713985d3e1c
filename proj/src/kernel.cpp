#include "kslab/kernel.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace kslab {

namespace {

// Integral over one cell of e^{-beta * (distance to the near node)} times the
// linear interpolant of u, expressed as weights on the two node values:
//   near node (where the exponential weight is 1):  (alpha - 1 + E) * dx/alpha^2
//   far node  (where the weight is E = e^{-alpha}): (1 - E*(1+alpha)) * dx/alpha^2
// with alpha = beta*dx.  Both closed forms cancel catastrophically for small
// alpha, so the alternating series is summed instead below alpha = 0.5.
struct CellWeights {
  double near, far;
};

CellWeights cell_weights(double alpha, double dx) {
  CellWeights w;
  if (alpha < 0.5) {
    // near: sum_{j>=0} (-alpha)^j / (j+2)!     far: sum_{j>=0} (-alpha)^j (j+1) / (j+2)!
    double term = 0.5;  // j = 0 term of the near series: 1/2!
    double near = 0.0, far = 0.0;
    for (int j = 0; j < 30; ++j) {
      near += term;
      far += term * static_cast<double>(j + 1);
      term *= -alpha / static_cast<double>(j + 3);
      if (std::abs(term) < 1e-18) break;
    }
    w.near = dx * near;
    w.far = dx * far;
  } else {
    const double e = std::exp(-alpha);
    const double scale = dx / (alpha * alpha);
    w.near = (alpha - 1.0 + e) * scale;
    w.far = (1.0 - e * (1.0 + alpha)) * scale;
  }
  return w;
}

void check_tails(const TailModel& tails) {
  if (!(tails.left_value >= 0.0) || !std::isfinite(tails.left_value))
    throw ConfigError("kernel tails: left constant must be finite and >= 0");
  if (tails.right == TailModel::Right::Exponential &&
      (!(tails.right_rate > 0.0) || !std::isfinite(tails.right_rate)))
    throw ConfigError("kernel tails: exponential right tail needs rate > 0");
}

// One-sided exponential moving integrals:
//   L[i] = int_{-inf}^{x_i} e^{-lambda1 (x_i - y)} u(y) dy
//   R[i] = int_{x_i}^{inf}  e^{-lambda2 (y - x_i)} u(y) dy
// The shifted form keeps every factor <= 1, so both recurrences are stable.
void accumulate(const GridFunction& u, const TailModel& tails, const DecayRates& r,
                std::vector<double>& L, std::vector<double>& R) {
  const std::size_t n = u.size();
  const double dx = u.dx;
  L.resize(n);
  R.resize(n);

  const double a1 = r.lambda1 * dx;
  const double e1 = std::exp(-a1);
  const CellWeights w1 = cell_weights(a1, dx);
  L[0] = tails.left_value / r.lambda1;
  for (std::size_t i = 1; i < n; ++i)
    L[i] = e1 * L[i - 1] + w1.far * u[i - 1] + w1.near * u[i];

  const double a2 = r.lambda2 * dx;
  const double e2 = std::exp(-a2);
  const CellWeights w2 = cell_weights(a2, dx);
  switch (tails.right) {
    case TailModel::Right::Zero:
      R[n - 1] = 0.0;
      break;
    case TailModel::Right::Constant:
      R[n - 1] = u[n - 1] / r.lambda2;
      break;
    case TailModel::Right::Exponential:
      R[n - 1] = u[n - 1] / (r.lambda2 + tails.right_rate);
      break;
  }
  for (std::size_t i = n - 1; i-- > 0;)
    R[i] = e2 * R[i + 1] + w2.far * u[i + 1] + w2.near * u[i];
}

DecayRates prepare(const GridFunction& u, const TailModel& tails,
                   const SystemParams& p, double c) {
  validate_density(u, "kernel input");
  check_tails(tails);
  const DecayRates r = frame_rates(p, c);
  if (u.dx * r.lambda1 > 50.0)
    throw ConfigError("kernel: dx*lambda1 > 50, quadrature weights underflow; refine the grid");
  return r;
}

}  // namespace

GridFunction psi(const GridFunction& u, const TailModel& tails,
                 const SystemParams& p, double c) {
  const DecayRates r = prepare(u, tails, p, c);
  std::vector<double> L, R;
  accumulate(u, tails, r, L, R);
  GridFunction out = u;
  const double mb = p.mu * r.B;
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = mb * (L[i] + R[i]);
  return out;
}

GridFunction psi_x(const GridFunction& u, const TailModel& tails,
                   const SystemParams& p, double c) {
  const DecayRates r = prepare(u, tails, p, c);
  std::vector<double> L, R;
  accumulate(u, tails, r, L, R);
  GridFunction out = u;
  const double mb = p.mu * r.B;
  for (std::size_t i = 0; i < u.size(); ++i)
    out[i] = mb * (r.lambda2 * R[i] - r.lambda1 * L[i]);
  return out;
}

PsiField psi_field(const GridFunction& u, const TailModel& tails,
                   const SystemParams& p, double c) {
  const DecayRates r = prepare(u, tails, p, c);
  std::vector<double> L, R;
  accumulate(u, tails, r, L, R);
  PsiField f;
  f.rates = r;
  f.psi = u;
  f.psi_x = u;
  f.psi_xx = u;
  const double mb = p.mu * r.B;
  for (std::size_t i = 0; i < u.size(); ++i) {
    f.psi[i] = mb * (L[i] + R[i]);
    f.psi_x[i] = mb * (r.lambda2 * R[i] - r.lambda1 * L[i]);
    f.psi_xx[i] = p.lambda * f.psi[i] - p.tau * c * f.psi_x[i] - p.mu * u[i];
  }
  return f;
}

GridFunction psi_xx_from_identity(const GridFunction& psi, const GridFunction& psi_x,
                                  const GridFunction& u, const SystemParams& p, double c) {
  if (!same_grid(psi, psi_x) || !same_grid(psi, u))
    throw ConfigError("psi_xx_from_identity: grids differ");
  GridFunction out = psi;
  for (std::size_t i = 0; i < psi.size(); ++i)
    out[i] = p.lambda * psi[i] - p.tau * c * psi_x[i] - p.mu * u[i];
  return out;
}

SuperSolutionCheck super_solution_check(const GridFunction& u, const TailModel& tails,
                                        const SystemParams& p, double c,
                                        double kappa, double M) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    throw ConfigError("super_solution_check: kappa must be >= 0");
  if (!(M > 0.0) || !std::isfinite(M))
    throw ConfigError("super_solution_check: M must be positive");
  validate_density(u, "super_solution_check input");
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double env = M * std::exp(-kappa * u.x(i));
    if (u[i] > env * (1.0 + 1e-12))
      throw ConfigError("super_solution_check: input exceeds M*exp(-kappa x) at node " +
                        std::to_string(i));
  }
  if (tails.left_value > M * std::exp(-kappa * u.x_left()) * (1.0 + 1e-12))
    throw ConfigError("super_solution_check: left tail exceeds the envelope");
  if (kappa > 0.0 && tails.right == TailModel::Right::Constant)
    throw ConfigError("super_solution_check: constant right tail incompatible with kappa > 0");
  if (tails.right == TailModel::Right::Exponential && tails.right_rate < kappa)
    throw ConfigError("super_solution_check: right tail flatter than the envelope");

  const PsiField f = psi_field(u, tails, p, c);
  const DecayRates& r = f.rates;

  SuperSolutionCheck out;
  out.functional = f.psi;
  out.bound = f.psi;
  const double coef =
      r.B * std::max(0.0, (p.tau * c + kappa) * r.lambda2 - p.lambda) / (r.lambda2 + kappa);
  const double front = p.chi * p.mu * (coef + 1.0) * M;
  double excess = -HUGE_VAL;
  for (std::size_t i = 0; i < u.size(); ++i) {
    out.functional[i] = p.chi * (kappa * f.psi_x[i] - f.psi_xx[i]);
    out.bound[i] = front * std::exp(-kappa * u.x(i));
    excess = std::max(excess, out.functional[i] - out.bound[i]);
  }
  // The linear interpolant of admissible node values can overshoot the convex
  // envelope mid-cell by O((kappa dx)^2), so the certificate carries a
  // matching slack.
  out.slack = p.chi * p.mu * M * 0.25 * (kappa * u.dx) * (kappa * u.dx) + 1e-12;
  out.max_excess = excess;
  out.certified = excess <= out.slack;
  return out;
}

}  // namespace kslab
