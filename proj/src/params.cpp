#include "kslab/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kslab {

void SystemParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(std::string("model parameter ") + name + " must be positive and finite");
  };
  if (!(chi >= 0.0) || !std::isfinite(chi))
    throw ConfigError("model parameter chi must be >= 0 and finite");
  positive(mu, "mu");
  positive(lambda, "lambda");
  positive(a, "a");
  positive(b, "b");
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw ConfigError("model parameter tau must be >= 0 and finite");
}

DecayRates decay_rates(const SystemParams& p, double c) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw ConfigError("decay_rates: frame speed c must be positive and finite");
  return frame_rates(p, c);
}

DecayRates frame_rates(const SystemParams& p, double c) {
  p.validate();
  if (!(c >= 0.0) || !std::isfinite(c))
    throw ConfigError("frame_rates: frame speed c must be >= 0 and finite");
  // s = sqrt(4*lambda + tau^2 c^2) without intermediate overflow; lambda2 via
  // lambda/lambda1 to avoid cancellation for large tau*c.
  const double s = std::hypot(p.tau * c, 2.0 * std::sqrt(p.lambda));
  DecayRates r;
  r.c = c;
  r.lambda1 = 0.5 * (p.tau * c + s);
  r.lambda2 = p.lambda / r.lambda1;
  r.B = 1.0 / s;
  return r;
}

double speed_of_kappa(double a, double kappa) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("speed_of_kappa: a must be positive");
  if (!(kappa > 0.0) || !(kappa <= std::sqrt(a)))
    throw ConfigError("speed_of_kappa: kappa must lie in (0, sqrt(a)]");
  return (a + kappa * kappa) / kappa;
}

double kappa_of_speed(double a, double c) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("kappa_of_speed: a must be positive");
  const double cmin = 2.0 * std::sqrt(a);
  if (!(c > cmin) || !std::isfinite(c))
    throw ConfigError("kappa_of_speed: requires c > 2*sqrt(a)");
  // Smaller root written to avoid cancellation: 2a / (c + sqrt(c^2 - 4a)).
  const double disc = std::sqrt((c - cmin) * (c + cmin));
  return 2.0 * a / (c + disc);
}

double b_star_supremand(const SystemParams& p, double kappa) {
  const DecayRates r = decay_rates(p, speed_of_kappa(p.a, kappa));
  const double excess = kappa - r.lambda2;
  if (excess <= 0.0) return 1.0;
  return 1.0 + r.lambda2 * excess / ((r.lambda1 + r.lambda2) * (kappa + r.lambda2));
}

namespace {

// Golden-section maximization on [lo, hi]; the running best includes both
// endpoints, so boundary-attained maxima are found exactly.
template <class F>
double golden_max(F&& f, double lo, double hi) {
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double best = std::max(f(lo), f(hi));
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 120 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = f(x1);
    }
    best = std::max(best, std::max(f1, f2));
  }
  return best;
}

}  // namespace

double b_star(const SystemParams& p) {
  p.validate();
  const double sqa = std::sqrt(p.a);
  const double eps = 1e-8 * sqa;
  // Scan includes the right endpoint: the supremand extends continuously to
  // kappa = sqrt(a), where the supremum is attained whenever it sits on the
  // boundary (always the case at tau = 0 with lambda < a).
  const std::size_t n = 10000;
  auto f = [&p](double k) { return b_star_supremand(p, k); };
  const double lo = eps;
  const double hi = sqa;
  double best = -1.0;
  std::size_t ibest = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    // min() guards the right endpoint: lo + (hi - lo) may round above hi.
    const double k = std::min(hi, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n));
    const double v = f(k);
    if (v > best) {
      best = v;
      ibest = i;
    }
  }
  const double h = (hi - lo) / static_cast<double>(n);
  const double blo = std::max(lo, lo + h * (static_cast<double>(ibest) - 1.0));
  const double bhi = std::min(hi, lo + h * (static_cast<double>(ibest) + 1.0));
  const double refined = golden_max(f, blo, bhi);
  return std::clamp(std::max(best, refined), 1.0, 2.0);
}

double kappa_star(const SystemParams& p) {
  p.validate();
  const double sqa = std::sqrt(p.a);
  if (p.tau >= 1.0) return sqa;
  const double other = std::sqrt((p.lambda + p.tau * p.a) / (1.0 - p.tau));
  return std::min(sqa, other);
}

double kappa_star_from_sup(const SystemParams& p) {
  p.validate();
  const double sqa = std::sqrt(p.a);
  auto g = [&p](double k) {
    return decay_rates(p, speed_of_kappa(p.a, k)).lambda1 - k;
  };
  // g is strictly decreasing; g(0+) >= sqrt(lambda) > 0.
  if (g(sqa) >= 0.0) return sqa;
  double lo = 1e-12 * sqa;
  double hi = sqa;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * sqa; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) >= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double c_star(const SystemParams& p) {
  const double ks = kappa_star(p);
  const double sqa = std::sqrt(p.a);
  if (ks == sqa) return 2.0 * sqa;  // saturated branch: exact minimal value
  return ks + p.a / ks;
}

Thresholds thresholds(const SystemParams& p) {
  return Thresholds{kappa_star(p), c_star(p), b_star(p)};
}

Hypotheses check_hypotheses(const SystemParams& p) {
  p.validate();
  const double cm = p.chi * p.mu;
  Hypotheses h;
  h.h1 = p.b > cm;
  h.h2 = p.b > b_star(p) * cm;
  h.h3 = p.b > 2.0 * cm;
  h.h4 = p.tau >= 0.5 * std::max(0.0, 1.0 - p.lambda / p.a);
  return h;
}

}  // namespace kslab
