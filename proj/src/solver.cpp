#include "kslab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kslab {

void SolverConfig::validate(const SystemParams& p) const {
  p.validate();
  if (!(xl < xr)) throw ConfigError("solver: requires xl < xr");
  if (n < 64) throw ConfigError("solver: requires n >= 64");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("solver: dt must be positive");
  if (left_bc == LeftBc::Fixed && (!(left_value >= 0.0) || !std::isfinite(left_value)))
    throw ConfigError("solver: fixed left value must be finite and >= 0");
  if (right_bc == RightBc::Extrapolate &&
      (!(right_rate >= 0.0) || !std::isfinite(right_rate)))
    throw ConfigError("solver: extrapolation rate must be finite and >= 0");
  if (!(blowup_cap > 0.0) || !std::isfinite(blowup_cap))
    throw ConfigError("solver: blowup_cap must be positive and finite");
  if (p.b > p.chi * p.mu && blowup_cap <= p.uniform_bound())
    throw ConfigError("solver: blowup_cap must exceed a/(b - chi*mu) when b > chi*mu");
}

TailModel SolverConfig::tails_for(const GridFunction& u) const {
  TailModel t;
  t.left_value = left_bc == LeftBc::Fixed ? left_value : u.values.front();
  if (right_bc == RightBc::Zero) {
    t.right = TailModel::Right::Zero;
  } else if (right_rate > 0.0) {
    t.right = TailModel::Right::Exponential;
    t.right_rate = right_rate;
  } else {
    t.right = TailModel::Right::Constant;
  }
  return t;
}

namespace {

void check_grid_matches(const GridFunction& u, const SolverConfig& cfg, const char* what) {
  const GridFunction g = cfg.grid();
  if (u.size() != g.size() || u.x0 != g.x0 || u.dx != g.dx)
    throw ConfigError(std::string(what) + ": grid does not match the solver configuration");
}

// Drift + reaction for every node; pinned boundary nodes get 0.
void explicit_part(const SolverState& s, const SolverConfig& cfg, const SystemParams& p,
                   double c, std::vector<double>& out) {
  const GridFunction& u = s.u;
  const std::size_t n = u.size();
  const double dx = u.dx;
  out.assign(n, 0.0);

  const bool pin_left = cfg.left_bc == LeftBc::Fixed;
  const bool pin_right = cfg.right_bc == RightBc::Zero;
  const double er = std::exp(-cfg.right_rate * dx);

  for (std::size_t i = 0; i < n; ++i) {
    if ((i == 0 && pin_left) || (i == n - 1 && pin_right)) continue;
    const double ul = i > 0 ? u[i - 1] : u[1];                 // mirror ghost (no-flux)
    const double ur = i < n - 1 ? u[i + 1] : u[n - 1] * er;    // extrapolation ghost
    const double w = c - p.chi * s.psi.psi_x[i];
    double drift;
    if (cfg.advection == Advection::Centered) {
      drift = w * (ur - ul) / (2.0 * dx);
    } else {
      drift = w >= 0.0 ? w * (ur - u[i]) / dx : w * (u[i] - ul) / dx;
    }
    const double react = (p.a - p.chi * s.psi.psi_xx[i] - p.b * u[i]) * u[i];
    out[i] = drift + react;
  }
}

void enforce_gates(const SolverState& s, const SolverConfig& cfg, const SystemParams& p,
                   double c) {
  double wmax = 0.0;
  for (std::size_t i = 0; i < s.u.size(); ++i)
    wmax = std::max(wmax, std::abs(c - p.chi * s.psi.psi_x[i]));
  const double dx = s.u.dx;
  if (cfg.dt * wmax > 0.4 * dx)
    throw ConfigError("solver: dt violates the advection gate dt <= 0.4*dx/max|c - chi*psi_x| (max drift " +
                      std::to_string(wmax) + ")");
  if (cfg.scheme == Scheme::Explicit && cfg.dt > 0.4 * dx * dx / 2.0)
    throw ConfigError("solver: explicit scheme requires dt <= 0.4*dx^2/2");
}

// Tridiagonal solve of (I - dt*D2) u_new = rhs with the configured boundary
// closures folded into the first and last rows.
void implicit_diffusion(const SolverConfig& cfg, const std::vector<double>& rhs_vec,
                        double dx, std::vector<double>& out,
                        std::vector<double>& diag, std::vector<double>& work) {
  const std::size_t n = rhs_vec.size();
  const double r = cfg.dt / (dx * dx);
  diag.assign(n, 1.0 + 2.0 * r);
  std::vector<double>& c_prime = work;
  c_prime.assign(n, 0.0);
  out = rhs_vec;

  double sup0 = -r;
  if (cfg.left_bc == LeftBc::Fixed) {
    diag[0] = 1.0;
    sup0 = 0.0;
  } else {
    sup0 = -2.0 * r;  // mirror ghost
  }
  double subn = -r;
  if (cfg.right_bc == RightBc::Zero) {
    diag[n - 1] = 1.0;
    subn = 0.0;
  } else {
    const double er = std::exp(-cfg.right_rate * dx);
    diag[n - 1] = 1.0 + r * (2.0 - er);
  }

  // Thomas sweep.
  c_prime[0] = sup0 / diag[0];
  out[0] = out[0] / diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double sub = i == n - 1 ? subn : -r;
    const double sup = i == n - 1 ? 0.0 : -r;
    const double m = diag[i] - sub * c_prime[i - 1];
    c_prime[i] = sup / m;
    out[i] = (out[i] - sub * out[i - 1]) / m;
  }
  for (std::size_t i = n - 1; i-- > 0;) out[i] -= c_prime[i] * out[i + 1];
}

void refresh_psi(SolverState& s, const SolverConfig& cfg, const SystemParams& p, double c) {
  s.psi = psi_field(s.u, cfg.tails_for(s.u), p, c);
}

}  // namespace

SolverState make_state(const GridFunction& u0, const SolverConfig& cfg,
                       const SystemParams& p, double c) {
  cfg.validate(p);
  validate_density(u0, "initial datum");
  check_grid_matches(u0, cfg, "initial datum");
  SolverState s;
  s.t = 0.0;
  s.u = u0;
  s.psi = psi_field(u0, cfg.tails_for(u0), p, c);
  return s;
}

SolverState make_state_frozen(const GridFunction& u0, const GridFunction& u_env,
                              const SolverConfig& cfg, const SystemParams& p, double c) {
  cfg.validate(p);
  validate_density(u0, "initial datum");
  validate_density(u_env, "environment profile");
  check_grid_matches(u0, cfg, "initial datum");
  check_grid_matches(u_env, cfg, "environment profile");
  SolverState s;
  s.t = 0.0;
  s.u = u0;
  s.psi = psi_field(u_env, cfg.tails_for(u_env), p, c);
  return s;
}

GridFunction rhs(const SolverState& s, const SolverConfig& cfg, const SystemParams& p,
                 double c) {
  check_grid_matches(s.u, cfg, "state");
  std::vector<double> expl;
  explicit_part(s, cfg, p, c, expl);

  GridFunction out = s.u;
  const std::size_t n = s.u.size();
  const double dx2 = s.u.dx * s.u.dx;
  const bool pin_left = cfg.left_bc == LeftBc::Fixed;
  const bool pin_right = cfg.right_bc == RightBc::Zero;
  const double er = std::exp(-cfg.right_rate * s.u.dx);
  for (std::size_t i = 0; i < n; ++i) {
    if ((i == 0 && pin_left) || (i == n - 1 && pin_right)) {
      out[i] = 0.0;
      continue;
    }
    const double ul = i > 0 ? s.u[i - 1] : s.u[1];
    const double ur = i < n - 1 ? s.u[i + 1] : s.u[n - 1] * er;
    out[i] = (ul - 2.0 * s.u[i] + ur) / dx2 + expl[i];
  }
  return out;
}

void step(SolverState& s, const SolverConfig& cfg, const SystemParams& p, double c) {
  const std::size_t n = s.u.size();
  const double dx = s.u.dx;
  enforce_gates(s, cfg, p, c);

  static thread_local std::vector<double> expl, rhs_vec, unew, diag, work;
  explicit_part(s, cfg, p, c, expl);

  if (cfg.scheme == Scheme::Imex) {
    rhs_vec.resize(n);
    for (std::size_t i = 0; i < n; ++i) rhs_vec[i] = s.u[i] + cfg.dt * expl[i];
    if (cfg.left_bc == LeftBc::Fixed) rhs_vec[0] = cfg.left_value;
    if (cfg.right_bc == RightBc::Zero) rhs_vec[n - 1] = 0.0;
    implicit_diffusion(cfg, rhs_vec, dx, unew, diag, work);
  } else {
    const double dx2 = dx * dx;
    const double er = std::exp(-cfg.right_rate * dx);
    unew.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ul = i > 0 ? s.u[i - 1] : s.u[1];
      const double ur = i < n - 1 ? s.u[i + 1] : s.u[n - 1] * er;
      unew[i] = s.u[i] + cfg.dt * ((ul - 2.0 * s.u[i] + ur) / dx2 + expl[i]);
    }
    if (cfg.left_bc == LeftBc::Fixed) unew[0] = cfg.left_value;
    if (cfg.right_bc == RightBc::Zero) unew[n - 1] = 0.0;
  }

  // Clip negative undershoots, keeping the removed mass on the books.
  double clipped = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (unew[i] < 0.0) {
      clipped -= unew[i];
      unew[i] = 0.0;
    }
    total += unew[i];
  }
  clipped *= dx;
  total *= dx;
  s.clipped_last = clipped;
  s.clipped_total += clipped;

  double umax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(unew[i]))
      throw RuntimeFailure("solver: non-finite value at t = " + std::to_string(s.t + cfg.dt) +
                           ", node " + std::to_string(i));
    umax = std::max(umax, unew[i]);
  }
  if (umax > cfg.blowup_cap) {
    throw BlowupError(s.t + cfg.dt, unew,
                      "solver: solution exceeded blowup_cap = " + std::to_string(cfg.blowup_cap) +
                          " at t = " + std::to_string(s.t + cfg.dt));
  }
  if (clipped > cfg.clip_abort_fraction * total)
    throw RuntimeFailure("solver: clipped mass " + std::to_string(clipped) +
                         " exceeds the per-step budget at t = " + std::to_string(s.t + cfg.dt));

  s.u.values.assign(unew.begin(), unew.end());
  s.t += cfg.dt;
  if (cfg.coupling == Coupling::SelfConsistent) refresh_psi(s, cfg, p, c);
}

Trace run(const GridFunction& u0, double t_end, const SolverConfig& cfg,
          const SystemParams& p, double c, const TraceSpec& spec) {
  if (!(t_end > 0.0)) throw ConfigError("run: t_end must be positive");
  SolverState s = make_state(u0, cfg, p, c);

  Trace tr;
  tr.level = spec.level > 0.0 ? spec.level : 0.5 * p.a / p.b;
  const double target_u = spec.target_u >= 0.0 ? spec.target_u : p.a / p.b;
  const double target_v = spec.target_v >= 0.0 ? spec.target_v : p.a * p.mu / (p.b * p.lambda);

  std::size_t probe_lo = 0, probe_hi = s.u.size() - 1;
  if (spec.probe_lo <= spec.probe_hi) {
    probe_lo = s.u.nearest(spec.probe_lo);
    probe_hi = s.u.nearest(spec.probe_hi);
    if (probe_lo > probe_hi) std::swap(probe_lo, probe_hi);
  }

  auto record = [&]() {
    tr.t.push_back(s.t);
    tr.u_max.push_back(max_value(s.u));
    double mn = s.u[probe_lo];
    for (std::size_t i = probe_lo; i <= probe_hi; ++i) mn = std::min(mn, s.u[i]);
    tr.u_min_probe.push_back(mn);
    const auto fp = front_position(s.u, tr.level);
    tr.front.push_back(fp ? *fp : std::nan(""));
    double du = 0.0, dv = 0.0;
    for (std::size_t i = 0; i < s.u.size(); ++i) {
      du = std::max(du, std::abs(s.u[i] - target_u));
      dv = std::max(dv, std::abs(s.psi.psi[i] - target_v));
    }
    tr.dist_u.push_back(du);
    tr.dist_v.push_back(dv);
  };

  const auto n_steps = static_cast<std::size_t>(std::llround(t_end / cfg.dt));
  const auto stride =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spec.sample_dt / cfg.dt)));
  tr.running_max = max_value(s.u);
  record();
  for (std::size_t k = 1; k <= n_steps; ++k) {
    step(s, cfg, p, c);
    tr.running_max = std::max(tr.running_max, max_value(s.u));
    if (k % stride == 0 || k == n_steps) record();
  }
  return tr;
}

std::optional<double> front_position(const GridFunction& u, double level) {
  if (!(level > 0.0) || !std::isfinite(level))
    throw ConfigError("front_position: level must be positive and finite");
  for (std::size_t i = u.size() - 1; i-- > 0;) {
    const double d0 = u[i] - level;
    const double d1 = u[i + 1] - level;
    if ((d0 >= 0.0 && d1 < 0.0) || (d0 < 0.0 && d1 >= 0.0)) {
      const double theta = d0 / (d0 - d1);
      return u.x(i) + theta * u.dx;
    }
  }
  return std::nullopt;
}

SpeedFit spreading_speed(const Trace& trace, double t1, double t2) {
  std::vector<double> ts, xs;
  for (std::size_t i = 0; i < trace.t.size(); ++i) {
    if (trace.t[i] >= t1 && trace.t[i] <= t2 && std::isfinite(trace.front[i])) {
      ts.push_back(trace.t[i]);
      xs.push_back(trace.front[i]);
    }
  }
  const std::size_t m = ts.size();
  if (m < 8)
    throw RuntimeFailure("spreading_speed: fewer than 8 front samples in [" +
                         std::to_string(t1) + ", " + std::to_string(t2) + "]");
  double tbar = 0.0, xbar = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    tbar += ts[i];
    xbar += xs[i];
  }
  tbar /= static_cast<double>(m);
  xbar /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (ts[i] - tbar) * (ts[i] - tbar);
    sxy += (ts[i] - tbar) * (xs[i] - xbar);
  }
  if (!(sxx > 0.0)) throw RuntimeFailure("spreading_speed: degenerate time window");
  SpeedFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = xbar - fit.slope * tbar;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = xs[i] - (fit.intercept + fit.slope * ts[i]);
    ss_res += r * r;
  }
  fit.std_error = m > 2 ? std::sqrt(ss_res / (static_cast<double>(m - 2) * sxx)) : 0.0;
  fit.n_samples = m;
  return fit;
}

}  // namespace kslab
