#include "kslab/wave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "kslab/errors.hpp"
#include "kslab/kernel.hpp"

namespace kslab {

void FixedPointConfig::validate() const {
  if (!(inner_tol > 0.0) || !(outer_tol > 0.0))
    throw ConfigError("fixed-point: tolerances must be positive");
  if (!(max_inner_time > 0.0))
    throw ConfigError("fixed-point: max_inner_time must be positive");
  if (max_outer_iters == 0)
    throw ConfigError("fixed-point: max_outer_iters must be positive");
  if (!(shift_factor >= 1.0) || !std::isfinite(shift_factor))
    throw ConfigError("fixed-point: shift_factor must be >= 1");
}

namespace {

SolverConfig inner_config(const FixedPointConfig& cfg, const Envelope& env) {
  SolverConfig s = cfg.solver;
  s.coupling = Coupling::Frozen;
  s.left_bc = LeftBc::NoFlux;
  s.right_bc = RightBc::Extrapolate;
  s.right_rate = env.kappa;
  return s;
}

// Frame speed adjusted so the discrete far-field operator acts on the tail
// mode e^{-kappa x} exactly as the continuum one does. The centered
// stencils applied to that mode give 2(cosh(k dx)-1)/dx^2 for the second
// derivative and -sinh(k dx)/dx for the first, so the discrete symbol
// misses the continuum value k^2 - c k by O(dx^2); that residual turns the
// tail amplitude into a slowly drifting near-neutral mode (relaxation time
// ~ 1/(c k^3 dx^2)) which stalls the fixed-point iteration. Solving
//   2(cosh(k dx) - 1)/dx^2 - c_h sinh(k dx)/dx = k^2 - c k
// for c_h removes the drift; c_h - c = O(k^2 c dx^2), within the scheme's
// truncation order.
double fitted_frame_speed(double c, double kappa, double dx) {
  const double kd = kappa * dx;
  return (2.0 * (std::cosh(kd) - 1.0) / (dx * dx) - kappa * kappa + c * kappa) * dx /
         std::sinh(kd);
}

double band_escape(const GridFunction& u, const Envelope& env) {
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = u.x(i);
    worst = std::max(worst, env.band_lo(x) - u[i]);
    worst = std::max(worst, u[i] - env.upper(x));
  }
  return worst;
}

void clamp_into_band(GridFunction& u, const Envelope& env) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = u.x(i);
    u[i] = std::clamp(u[i], env.band_lo(x), env.upper(x));
  }
}

}  // namespace

InnerResult inner_solve(const GridFunction& u_env, const Envelope& env,
                        const FixedPointConfig& cfg, const SystemParams& p, double c) {
  cfg.validate();
  if (!(env.kappa > 0.0)) throw ConfigError("inner_solve: envelope is unset");
  const SolverConfig scfg = inner_config(cfg, env);
  if (band_escape(u_env, env) > 1e-6)
    throw ConfigError("inner_solve: environment profile escapes the envelope band");

  GridFunction u0 = scfg.grid();
  for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = env.upper(u0.x(i));

  const double c_h = fitted_frame_speed(c, env.kappa, u0.dx);
  SolverState s = make_state_frozen(u0, u_env, scfg, p, c_h);

  const auto snap_stride =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1.0 / scfg.dt)));
  const auto max_steps = static_cast<std::size_t>(std::llround(cfg.max_inner_time / scfg.dt));

  InnerResult res;
  GridFunction snapshot = s.u;
  GridFunction prev = s.u;
  bool converged = false;
  for (std::size_t k = 1; k <= max_steps; ++k) {
    prev.values = s.u.values;
    step(s, scfg, p, c_h);
    ++res.steps;

    double inc = 0.0;
    for (std::size_t i = 0; i < s.u.size(); ++i)
      inc = std::max(inc, std::abs(s.u[i] - prev[i]));

    if (k % snap_stride == 0) {
      double defect = 0.0;
      for (std::size_t i = 0; i < s.u.size(); ++i)
        defect = std::max(defect, s.u[i] - snapshot[i]);
      res.monotonicity_defect = std::max(res.monotonicity_defect, defect);
      if (defect > 1e-8)
        throw DiscretizationFault(
            "inner_solve: evolution stopped being pointwise non-increasing (defect " +
            std::to_string(defect) + " at t = " + std::to_string(s.t) + ")");
      snapshot.values = s.u.values;
      res.envelope_violation = std::max(res.envelope_violation, band_escape(s.u, env));
    }

    if (inc < cfg.inner_tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("inner_solve: no convergence within max_inner_time = " +
                           std::to_string(cfg.max_inner_time));

  res.time_used = s.t;
  res.clipped = s.clipped_total;
  res.envelope_violation = std::max(res.envelope_violation, band_escape(s.u, env));
  if (res.envelope_violation > 1e-6)
    throw RuntimeFailure("inner_solve: band escape " + std::to_string(res.envelope_violation) +
                         " exceeds 1e-6");
  res.u = std::move(s.u);
  clamp_into_band(res.u, env);
  return res;
}

WaveProfile construct_wave(const SystemParams& p, double c, const FixedPointConfig& cfg) {
  cfg.validate();
  p.validate();
  if (!check_hypotheses(p).h2)
    throw ConfigError("wave: hypothesis H2 fails (b <= b_star(tau)*chi*mu)");
  const double cs = c_star(p);
  if (!(c > cs))
    throw ConfigError("wave: requires speed c > c_star(tau) = " + std::to_string(cs));
  const double kappa = kappa_of_speed(p.a, c);
  const double ks = kappa_star(p);
  if (!(kappa < ks))
    throw ConfigError("wave: decay rate " + std::to_string(kappa) +
                      " is not below kappa_star = " + std::to_string(ks));

  const double sqa = std::sqrt(p.a);
  const double eta =
      cfg.eta > 0.0 ? cfg.eta : 0.5 * std::min(0.5 * kappa, 0.5 * (sqa - kappa));
  const double shift = cfg.shift_factor * find_admissible_shift(p, kappa, eta);
  const Envelope env = build_envelope(p, kappa, eta, shift);

  GridFunction u_env = cfg.solver.grid();
  for (std::size_t i = 0; i < u_env.size(); ++i)
    u_env[i] = cfg.start_lower ? env.lower(u_env.x(i)) : env.upper(u_env.x(i));

  double worst_violation = 0.0;
  double clipped = 0.0;
  double delta = std::numeric_limits<double>::infinity();
  std::size_t iters = 0;
  bool converged = false;
  while (iters < cfg.max_outer_iters) {
    InnerResult r = inner_solve(u_env, env, cfg, p, c);
    ++iters;
    worst_violation = std::max(worst_violation, r.envelope_violation);
    clipped += r.clipped;
    delta = sup_diff(r.u, u_env);
    u_env = std::move(r.u);
    if (delta < cfg.outer_tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("wave: outer iteration did not reach outer_tol within " +
                           std::to_string(cfg.max_outer_iters) + " iterations (last delta " +
                           std::to_string(delta) + ")");

  WaveProfile w;
  w.c = c;
  w.kappa = kappa;
  w.envelope = env;
  w.u = std::move(u_env);
  const PsiField f = psi_field(w.u, TailModel::front(w.u.values.front(), kappa), p, c);
  w.v = f.psi;
  w.v_x = f.psi_x;
  w.diagnostics = verify_wave(w, p);
  w.diagnostics.outer_iters = iters;
  w.diagnostics.outer_delta = delta;
  w.diagnostics.envelope_violation =
      std::max(w.diagnostics.envelope_violation, worst_violation);
  w.diagnostics.clipped_mass = clipped;
  return w;
}

WaveResiduals wave_residuals(const WaveProfile& w, const SystemParams& p) {
  validate(w.u, "wave profile");
  validate(w.v, "chemical field");
  if (!same_grid(w.u, w.v)) throw ConfigError("wave_residuals: profile grids differ");
  const std::size_t n = w.u.size();
  const double dx = w.u.dx;

  const TailModel tails = w.kappa > 0.0
                              ? TailModel::front(w.u.values.front(), w.kappa)
                              : TailModel::constant(w.u.values.front());
  const PsiField f = psi_field(w.u, tails, p, w.c);

  WaveResiduals r;
  r.res_u.assign(n, 0.0);
  r.res_v.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double uxx = (w.u[i - 1] - 2.0 * w.u[i] + w.u[i + 1]) / (dx * dx);
    const double ux = (w.u[i + 1] - w.u[i - 1]) / (2.0 * dx);
    r.res_u[i] = uxx + (w.c - p.chi * f.psi_x[i]) * ux +
                 (p.a - p.chi * f.psi_xx[i] - p.b * w.u[i]) * w.u[i];
    const double vxx = (w.v[i - 1] - 2.0 * w.v[i] + w.v[i + 1]) / (dx * dx);
    const double vx = (w.v[i + 1] - w.v[i - 1]) / (2.0 * dx);
    r.res_v[i] = vxx + p.tau * w.c * vx - p.lambda * w.v[i] + p.mu * w.u[i];
  }
  return r;
}

WaveDiagnostics verify_wave(const WaveProfile& w, const SystemParams& p) {
  const WaveResiduals r = wave_residuals(w, p);
  WaveDiagnostics d;
  for (std::size_t i = 1; i + 1 < w.u.size(); ++i) {
    d.residual_u = std::max(d.residual_u, std::abs(r.res_u[i]));
    d.residual_v = std::max(d.residual_v, std::abs(r.res_v[i]));
  }

  // Decay rate: least-squares slope of -log u over the right quarter.
  const double xl = w.u.x_left();
  const double xr = w.u.x_right();
  const double x_start = xl + 0.75 * (xr - xl);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < w.u.size(); ++i) {
    const double x = w.u.x(i);
    if (x < x_start || !(w.u[i] > 0.0)) continue;
    const double y = -std::log(w.u[i]);
    ++m;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  if (m >= 8) {
    const double mm = static_cast<double>(m);
    d.decay_rate = (mm * sxy - sx * sy) / (mm * sxx - sx * sx);
  } else {
    d.decay_rate = std::numeric_limits<double>::quiet_NaN();
  }

  d.plateau_error = std::abs(w.u.at(xl + 5.0) - p.a / p.b);

  if (w.kappa > 0.0) {
    const double x1 = 10.0 / w.kappa;
    const double x2 = 20.0 / w.kappa;
    if (x1 >= xl && x2 <= xr) {
      const double r1 = w.u.at(x1) * std::exp(w.kappa * x1);
      const double r2 = w.u.at(x2) * std::exp(w.kappa * x2);
      d.tail_ratio_drift = std::abs(r2 - r1) / std::max(std::abs(r1), 1e-300);
    }
  }
  if (w.envelope.kappa > 0.0) d.envelope_violation = band_escape(w.u, w.envelope);
  return d;
}

ProbeReport minimal_speed_probe(const SystemParams& p, double c, const SolverConfig& scfg_in,
                                double t_end) {
  p.validate();
  if (!(c >= 0.0) || !std::isfinite(c))
    throw ConfigError("probe: frame speed must be finite and >= 0");
  if (!check_hypotheses(p).h3)
    throw ConfigError("probe: hypothesis H3 fails (b <= 2*chi*mu)");
  if (!(t_end > 0.0)) throw ConfigError("probe: t_end must be positive");

  const double sqa = std::sqrt(p.a);
  const double kappa0 =
      c > 2.0 * sqa * (1.0 + 1e-12) ? kappa_of_speed(p.a, c) : 1.5 * sqa;

  SolverConfig scfg = scfg_in;
  scfg.coupling = Coupling::SelfConsistent;
  scfg.left_bc = LeftBc::NoFlux;
  scfg.right_bc = RightBc::Extrapolate;
  scfg.right_rate = kappa0;

  GridFunction u0 = scfg.grid();
  for (std::size_t i = 0; i < u0.size(); ++i)
    u0[i] = (p.a / p.b) * std::min(1.0, std::exp(-kappa0 * u0.x(i)));

  TraceSpec ts;
  ts.sample_dt = 0.25;
  const Trace tr = run(u0, t_end, scfg, p, c, ts);

  ProbeReport rep;
  rep.t_end = t_end;
  rep.fit = spreading_speed(tr, 0.5 * t_end, t_end);
  bool first_seen = false;
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    if (tr.t[i] < 0.5 * t_end || !std::isfinite(tr.front[i])) continue;
    if (tr.front[i] > scfg.xr - 1.0)
      throw RuntimeFailure("probe: front reached the right boundary; enlarge the domain");
    if (!first_seen) {
      rep.front_first = tr.front[i];
      first_seen = true;
    }
    rep.front_last = tr.front[i];
  }
  return rep;
}

}  // namespace kslab
