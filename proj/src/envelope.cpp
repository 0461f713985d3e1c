#include "kslab/envelope.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "kslab/errors.hpp"
#include "kslab/kernel.hpp"

namespace kslab {

namespace {

void check_ranges(const SystemParams& p, double kappa, double eta) {
  p.validate();
  const auto h = check_hypotheses(p);
  if (!h.h2)
    throw ConfigError("envelope: requires b > b_star(tau)*chi*mu (logistic damping too weak)");
  const double ks = kappa_star(p);
  if (!(kappa > 0.0) || !(kappa < ks))
    throw ConfigError("envelope: kappa must lie in (0, kappa_star) = (0, " +
                      std::to_string(ks) + ")");
  const double eta_max = std::min(kappa, std::sqrt(p.a) - kappa);
  if (!(eta > 0.0) || !(eta < eta_max))
    throw ConfigError("envelope: eta must lie in (0, min{kappa, sqrt(a)-kappa}) = (0, " +
                      std::to_string(eta_max) + ")");
}

struct CertificateTerms {
  double gain;      // coefficient of the shift: kt*c - kt^2 - a > 0
  double fixed;     // shift-independent part of the bracket
  double per_shift; // bracket contribution proportional to the shift
  double decay;     // e^{-kappa1 * x_under(shift)} exponent rate kappa1
};

CertificateTerms certificate_terms(const SystemParams& p, double kappa, double eta) {
  const double kt = kappa + eta;
  const double c = speed_of_kappa(p.a, kappa);
  const DecayRates r = decay_rates(p, c);
  const double gain = kt * c - kt * kt - p.a;
  const double chimu = p.chi * p.mu;
  const double fixed = chimu * r.B * (kappa + p.tau * c + p.lambda) * r.lambda1 /
                           (r.lambda1 - kappa) +
                       chimu * r.B * std::max(p.tau * c - p.lambda, 0.0) * r.lambda2 /
                           (r.lambda2 + kappa) +
                       (p.b - chimu);
  const double per_shift = chimu * r.B * kt * r.lambda2 / (r.lambda2 + kappa);
  return {gain, fixed, per_shift, 2.0 * kappa - kt};
}

}  // namespace

Envelope build_envelope(const SystemParams& p, double kappa, double eta, double shift) {
  check_ranges(p, kappa, eta);
  if (!(shift >= 1.0) || !std::isfinite(shift))
    throw ConfigError("envelope: shift must be finite and >= 1");
  Envelope e;
  e.kappa = kappa;
  e.eta = eta;
  e.kappa_tilde = kappa + eta;
  e.shift = shift;
  e.cap = p.uniform_bound();
  e.x_under = std::log(shift) / eta;
  e.x_bar = std::log(shift * e.kappa_tilde / kappa) / eta;
  if (e.u_minus(e.x_bar) > e.cap)
    throw ConfigError("envelope: lower plateau exceeds the ceiling; increase the shift");
  return e;
}

double certificate_margin(const SystemParams& p, double kappa, double eta, double shift) {
  check_ranges(p, kappa, eta);
  if (!(shift >= 1.0) || !std::isfinite(shift))
    throw ConfigError("envelope: shift must be finite and >= 1");
  const CertificateTerms t = certificate_terms(p, kappa, eta);
  const double x_under = std::log(shift) / eta;
  return shift * t.gain - (t.fixed + t.per_shift * shift) * std::exp(-t.decay * x_under);
}

double sub_solution_margin(const SystemParams& p, const Envelope& env, double span,
                           EnvMember member) {
  if (!(span > 0.0)) throw ConfigError("sub_solution_margin: span must be positive");
  const double c = speed_of_kappa(p.a, env.kappa);

  // Padded grid: the left pad reaches the region where the member is exactly
  // constant (0 or cap), so the constant-tail extension is exact; the right
  // pad lets the exponential tail model take over smoothly.
  const double pad = 10.0 / env.kappa;
  const double x0 = std::min(env.x_under, -std::log(env.cap) / env.kappa) - pad;
  const double x1 = env.x_under + span + pad;
  const std::size_t n = 8192;
  GridFunction u = make_grid(x0, x1, n);
  if (member == EnvMember::Floor) {
    for (std::size_t i = 0; i < n; ++i) u[i] = env.band_lo(u.x(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) u[i] = env.upper(u.x(i));
  }
  TailModel tails = TailModel::front(u.values.front(), env.kappa);
  const PsiField f = psi_field(u, tails, p, c);

  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = u.x(i);
    if (x <= env.x_under || x >= env.x_under + span) continue;
    const double um = env.u_minus(x);
    const double a_op = env.u_minus_xx(x) + (c - p.chi * f.psi_x[i]) * env.u_minus_x(x) +
                        (p.a - p.chi * f.psi_xx[i] - p.b * um) * um;
    margin = std::min(margin, a_op);
  }
  return margin;
}

double find_admissible_shift(const SystemParams& p, double kappa, double eta) {
  check_ranges(p, kappa, eta);
  const CertificateTerms t = certificate_terms(p, kappa, eta);
  if (!(t.gain > 0.0))
    throw RuntimeFailure("find_admissible_shift: certificate gain kt*c - kt^2 - a is not positive");

  auto margin = [&](double d) { return certificate_margin(p, kappa, eta, d); };

  double hi = 1.0;
  if (margin(hi) < 0.0) {
    double lo = 1.0;
    hi = 2.0;
    while (margin(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e12) {
        // Name the dominant obstruction at the cap.
        const double x_under = std::log(hi) / eta;
        const double damp = std::exp(-t.decay * x_under);
        const char* worst =
            t.per_shift * hi * damp > t.fixed * damp ? "shift-proportional chemotaxis term"
                                                     : "fixed chemotaxis/logistic term";
        throw RuntimeFailure(std::string("find_admissible_shift: no admissible shift below 1e12; "
                                         "dominant obstruction is the ") +
                             worst);
      }
    }
    while (hi - lo > 1e-3 * hi) {
      const double mid = 0.5 * (lo + hi);
      if (margin(mid) >= 0.0)
        hi = mid;
      else
        lo = mid;
    }
  }

  const Envelope env = build_envelope(p, kappa, eta, hi);
  const double span = 40.0 / kappa;
  for (EnvMember m : {EnvMember::Floor, EnvMember::Ceiling}) {
    const double pw = sub_solution_margin(p, env, span, m);
    if (pw < -1e-8)
      throw RuntimeFailure(
          "find_admissible_shift: pointwise sub-solution inequality fails (margin " +
          std::to_string(pw) + ") for the " +
          (m == EnvMember::Floor ? "floor" : "ceiling") + " band member");
  }
  return hi;
}

}  // namespace kslab
