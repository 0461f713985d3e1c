// kslab: experiment driver for the traveling-wave laboratory.
//
// Subcommands: constants | kernel-test | wave | speed | stability | sweep.
// Each run writes CSV results plus an NDJSON log (run.ndjson) into --out.
// Exit codes: 0 success, 1 runtime failure, 2 config/hypothesis refusal.
// Output is byte-deterministic for a fixed config and seed: no timestamps,
// sorted JSON keys, shortest round-trip number formatting.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kslab/config.hpp"
#include "kslab/envelope.hpp"
#include "kslab/errors.hpp"
#include "kslab/grid.hpp"
#include "kslab/io.hpp"
#include "kslab/kernel.hpp"
#include "kslab/params.hpp"
#include "kslab/solver.hpp"
#include "kslab/wave.hpp"

namespace {

using nlohmann::json;
using namespace kslab;

struct Ctx {
  RunConfig cfg;
  std::filesystem::path out;
  std::string command;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::ofstream log;

  void event(json j) { log << j.dump() << "\n"; }

  // Emitted by each command once it has consumed its config keys, so the
  // echoed config is the fully resolved one (defaults included).
  void start_event() {
    json j;
    j["event"] = "start";
    j["command"] = command;
    j["seed"] = seed;
    j["config"] = cfg.resolved();
    event(std::move(j));
  }

  SystemParams model() const {
    SystemParams p;
    p.a = cfg.get_double("model.a", p.a);
    p.lambda = cfg.get_double("model.lambda", p.lambda);
    p.mu = cfg.get_double("model.mu", p.mu);
    p.chi = cfg.get_double("model.chi", p.chi);
    p.b = cfg.get_double("model.b", p.b);
    p.tau = cfg.get_double("model.tau", p.tau);
    return p;
  }

  SolverConfig solver() const {
    SolverConfig s;
    s.xl = cfg.get_double("solver.xl", s.xl);
    s.xr = cfg.get_double("solver.xr", s.xr);
    s.n = cfg.get_size("solver.n", s.n);
    s.dt = cfg.get_double("solver.dt", s.dt);
    const std::string scheme = cfg.get_string("solver.scheme", "imex");
    if (scheme == "imex")
      s.scheme = Scheme::Imex;
    else if (scheme == "explicit")
      s.scheme = Scheme::Explicit;
    else
      throw ConfigError("solver.scheme must be imex or explicit, got '" + scheme + "'");
    const std::string adv = cfg.get_string("solver.advection", "centered");
    if (adv == "centered")
      s.advection = Advection::Centered;
    else if (adv == "upwind")
      s.advection = Advection::Upwind;
    else
      throw ConfigError("solver.advection must be centered or upwind, got '" + adv + "'");
    return s;
  }

  FixedPointConfig fixed_point() const {
    FixedPointConfig f;
    f.solver = solver();
    f.inner_tol = cfg.get_double("wave.inner_tol", f.inner_tol);
    f.outer_tol = cfg.get_double("wave.outer_tol", f.outer_tol);
    f.max_inner_time = cfg.get_double("wave.max_inner_time", f.max_inner_time);
    f.max_outer_iters = cfg.get_size("wave.max_outer_iters", f.max_outer_iters);
    f.eta = cfg.get_double("wave.eta", f.eta);
    f.shift_factor = cfg.get_double("wave.shift_factor", f.shift_factor);
    f.start_lower = cfg.get_bool("wave.start_lower", f.start_lower);
    return f;
  }

  std::ofstream open_csv(const std::string& name) {
    std::ofstream f(out / name, std::ios::binary);
    if (!f) throw RuntimeFailure("cannot open output file " + (out / name).string());
    return f;
  }
};

std::string fmt_bool(bool v) { return v ? "true" : "false"; }

// ---------------------------------------------------------------- constants

int cmd_constants(Ctx& ctx) {
  const SystemParams p = ctx.model();
  const double c = ctx.cfg.get_double("constants.c", 2.5);
  ctx.cfg.reject_unknown();
  ctx.start_event();
  p.validate();
  const Thresholds th = thresholds(p);
  const Hypotheses h = check_hypotheses(p);
  const DecayRates r = decay_rates(p, c);

  auto csv = ctx.open_csv("constants.csv");
  csv << csv_row({"a", "lambda", "mu", "chi", "b", "tau", "c", "lambda1", "lambda2", "B",
                  "kappa_star", "c_star", "b_star", "uniform_bound", "h1", "h2", "h3", "h4"});
  csv << csv_row({format_double(p.a), format_double(p.lambda), format_double(p.mu),
                  format_double(p.chi), format_double(p.b), format_double(p.tau),
                  format_double(c), format_double(r.lambda1), format_double(r.lambda2),
                  format_double(r.B), format_double(th.kappa_star), format_double(th.c_star),
                  format_double(th.b_star), format_double(h.h1 ? p.uniform_bound() : std::nan("")),
                  fmt_bool(h.h1), fmt_bool(h.h2), fmt_bool(h.h3), fmt_bool(h.h4)});

  json res;
  res["event"] = "result";
  res["kappa_star"] = th.kappa_star;
  res["c_star"] = th.c_star;
  res["b_star"] = th.b_star;
  res["lambda1"] = r.lambda1;
  res["lambda2"] = r.lambda2;
  res["B"] = r.B;
  res["h1"] = h.h1;
  res["h2"] = h.h2;
  res["h3"] = h.h3;
  res["h4"] = h.h4;
  ctx.event(std::move(res));
  return 0;
}

// --------------------------------------------------------------- kernel-test

int cmd_kernel_test(Ctx& ctx) {
  const SystemParams p = ctx.model();
  const std::size_t n = ctx.cfg.get_size("kernel.n", 4096);
  const double c = ctx.cfg.get_double("kernel.c", 2.5);
  ctx.cfg.reject_unknown();
  ctx.start_event();
  p.validate();
  if (n < 64) throw ConfigError("kernel.n must be at least 64");

  auto csv = ctx.open_csv("kernel.csv");
  csv << csv_row({"check", "n", "measured", "allowed", "status"});
  bool all_ok = true;
  auto report = [&](const std::string& name, std::size_t nn, double measured, double allowed) {
    const bool ok = measured <= allowed;
    all_ok = all_ok && ok;
    csv << csv_row({name, std::to_string(nn), format_double(measured), format_double(allowed),
                    ok ? "ok" : "failed"});
    json j;
    j["event"] = "step-summary";
    j["check"] = name;
    j["measured"] = measured;
    j["allowed"] = allowed;
    j["ok"] = ok;
    ctx.event(std::move(j));
  };

  // constant input: psi == mu*M/lambda exactly
  {
    const double M = 2.0;
    auto u = sample(-10.0, 10.0, n | 1, [&](double) { return M; });
    auto f = psi_field(u, TailModel::constant(M), p, c);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      worst = std::max(worst, std::abs(f.psi[i] - p.mu * M / p.lambda));
    report("constant", u.size(), worst, 1e-12);
  }
  // exponential datum with its exact closed-form field: u = 1 left of 0,
  // e^{-kappa x} on [0, 6], decaying at rate kappa beyond. Integrating the
  // Green kernel piecewise gives
  //   psi(x) = mu B [ e^{-l1 x}/l1 + (e^{-k x} - e^{-l1 x})/(l1 - k)
  //                   + e^{-k x}/(l2 + k) ].
  {
    const double kappa = 0.1;
    const DecayRates r = decay_rates(p, c);
    auto u = sample(0.0, 6.0, n | 1, [&](double x) { return std::exp(-kappa * x); });
    auto f = psi_field(u, TailModel::front(1.0, kappa), p, c);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double x = u.x(i);
      const double ref = p.mu * r.B *
                         (std::exp(-r.lambda1 * x) / r.lambda1 +
                          (std::exp(-kappa * x) - std::exp(-r.lambda1 * x)) / (r.lambda1 - kappa) +
                          std::exp(-kappa * x) / (r.lambda2 + kappa));
      worst = std::max(worst, std::abs(f.psi[i] - ref));
    }
    report("exponential", u.size(), worst, 1e-8);
  }
  // |psi_x| <= lambda1 * psi on seeded random nonnegative inputs
  {
    std::mt19937_64 rng(ctx.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const DecayRates r = decay_rates(p, c);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      auto u = sample(-10.0, 10.0, 513, [&](double) { return U(rng); });
      auto f = psi_field(u, TailModel::zero(), p, c);
      for (std::size_t i = 0; i < u.size(); ++i)
        worst = std::max(worst, std::abs(f.psi_x[i]) - r.lambda1 * f.psi[i]);
    }
    report("gradient-bound", 513, worst, 1e-12);
  }
  // second-order elliptic residual decay under grid halving
  {
    auto residual = [&](std::size_t nn) {
      auto u = sample(-20.0, 20.0, nn, [](double x) { return std::exp(-x * x / 8.0); });
      auto f = psi_field(u, TailModel::zero(), p, c);
      double worst = 0.0;
      const double dx = u.dx;
      for (std::size_t i = 1; i + 1 < u.size(); ++i) {
        const double pxx = (f.psi[i - 1] - 2.0 * f.psi[i] + f.psi[i + 1]) / (dx * dx);
        const double px = (f.psi[i + 1] - f.psi[i - 1]) / (2.0 * dx);
        worst = std::max(worst,
                         std::abs(pxx + p.tau * c * px - p.lambda * f.psi[i] + p.mu * u[i]));
      }
      return worst;
    };
    const double ratio = residual(n / 2 + 1) / residual(n + 1);
    report("refinement-ratio-error", n, std::abs(ratio - 4.0), 0.6);
  }

  json res;
  res["event"] = "result";
  res["all_ok"] = all_ok;
  ctx.event(std::move(res));
  return all_ok ? 0 : 1;
}

// --------------------------------------------------------------------- wave

int cmd_wave(Ctx& ctx) {
  const SystemParams p = ctx.model();
  FixedPointConfig fp = ctx.fixed_point();
  const double c = ctx.cfg.get_double("wave.c", 2.5);
  ctx.cfg.reject_unknown();
  ctx.start_event();

  WaveProfile w = construct_wave(p, c, fp);
  const WaveResiduals res = wave_residuals(w, p);

  {
    json j;
    j["event"] = "step-summary";
    j["stage"] = "envelope";
    j["kappa"] = w.kappa;
    j["eta"] = w.envelope.eta;
    j["shift"] = w.envelope.shift;
    j["x_under"] = w.envelope.x_under;
    j["x_bar"] = w.envelope.x_bar;
    ctx.event(std::move(j));
  }

  auto csv = ctx.open_csv("wave.csv");
  csv << csv_row({"x", "U", "V", "Psi_x", "residual_u", "residual_v"});
  for (std::size_t i = 0; i < w.u.size(); ++i)
    csv << csv_row({format_double(w.u.x(i)), format_double(w.u[i]), format_double(w.v[i]),
                    format_double(w.v_x[i]), format_double(res.res_u[i]),
                    format_double(res.res_v[i])});

  const WaveDiagnostics& d = w.diagnostics;
  json out;
  out["event"] = "result";
  out["c"] = w.c;
  out["kappa"] = w.kappa;
  out["outer_iters"] = d.outer_iters;
  out["outer_delta"] = d.outer_delta;
  out["residual_u"] = d.residual_u;
  out["residual_v"] = d.residual_v;
  out["decay_rate"] = d.decay_rate;
  out["plateau_error"] = d.plateau_error;
  out["tail_ratio_drift"] = d.tail_ratio_drift;
  out["envelope_violation"] = d.envelope_violation;
  out["clipped_mass"] = d.clipped_mass;
  ctx.event(std::move(out));
  return 0;
}

// -------------------------------------------------------------------- speed

int cmd_speed(Ctx& ctx) {
  const SystemParams p = ctx.model();
  SolverConfig sc = ctx.solver();
  // lab-frame defaults want a wide domain
  if (!ctx.cfg.has("solver.xl")) sc.xl = -100.0;
  if (!ctx.cfg.has("solver.xr")) sc.xr = 100.0;
  if (!ctx.cfg.has("solver.n")) sc.n = 4096;
  if (!ctx.cfg.has("solver.dt")) sc.dt = 5e-3;
  const std::string mode = ctx.cfg.get_string("speed.mode", "lab");
  const double t_end = ctx.cfg.get_double("speed.t_end", 40.0);
  const double win_lo = ctx.cfg.get_double("speed.window_lo", 0.5 * t_end);
  const double win_hi = ctx.cfg.get_double("speed.window_hi", t_end);
  const double frame_c = ctx.cfg.get_double("speed.c", mode == "lab" ? 0.0 : 1.5);
  const double width = ctx.cfg.get_double("speed.width", 5.0);
  ctx.cfg.reject_unknown();
  ctx.start_event();
  p.validate();
  if (!(t_end > 0.0) || !(win_lo >= 0.0) || !(win_hi > win_lo) || win_hi > t_end)
    throw ConfigError("speed: need 0 <= window_lo < window_hi <= t_end and t_end > 0");

  Trace tr;
  SpeedFit fit;
  if (mode == "frame") {
    ProbeReport rep = minimal_speed_probe(p, frame_c, sc, t_end);
    fit = rep.fit;
    // re-run to serialize the trace (probe reports the fit only)
    SolverConfig scp = sc;
    scp.coupling = Coupling::SelfConsistent;
    scp.left_bc = LeftBc::NoFlux;
    scp.right_bc = RightBc::Extrapolate;
    const double sqa = std::sqrt(p.a);
    const double kappa0 =
        frame_c > 2.0 * sqa * (1.0 + 1e-12) ? kappa_of_speed(p.a, frame_c) : 1.5 * sqa;
    scp.right_rate = kappa0;
    auto u0 = sample(scp.xl, scp.xr, scp.n,
                     [&](double x) { return (p.a / p.b) * std::min(1.0, std::exp(-kappa0 * x)); });
    TraceSpec ts;
    ts.sample_dt = 0.25;
    tr = run(u0, t_end, scp, p, frame_c, ts);
  } else if (mode == "lab") {
    if (!check_hypotheses(p).h1)
      throw ConfigError("speed: hypothesis H1 fails (b <= chi*mu), no uniform bound");
    auto u0 = sample(sc.xl, sc.xr, sc.n, [&](double x) {
      const double s = 1.0 - (x / width) * (x / width);
      return s > 0.0 ? (p.a / p.b) * s * s : 0.0;
    });
    TraceSpec ts;
    ts.sample_dt = 0.5;
    tr = run(u0, t_end, sc, p, 0.0, ts);
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
      if (tr.t[i] < win_lo) continue;
      if (!std::isfinite(tr.front[i]) || tr.front[i] > sc.xr - 1.0)
        throw RuntimeFailure("speed: front lost or touching the right boundary; enlarge the domain");
    }
    fit = spreading_speed(tr, win_lo, win_hi);
  } else {
    throw ConfigError("speed.mode must be lab or frame, got '" + mode + "'");
  }

  auto csv = ctx.open_csv("speed.csv");
  csv << csv_row({"t", "front", "umax"});
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    csv << csv_row({format_double(tr.t[i]), format_double(tr.front[i]),
                    format_double(tr.u_max[i])});

  json res;
  res["event"] = "result";
  res["mode"] = mode;
  res["slope"] = fit.slope;
  res["std_error"] = fit.std_error;
  res["intercept"] = fit.intercept;
  res["n_samples"] = fit.n_samples;
  res["reference_speed"] = 2.0 * std::sqrt(p.a);
  ctx.event(std::move(res));
  return 0;
}

// ---------------------------------------------------------------- stability

int cmd_stability(Ctx& ctx) {
  const SystemParams p = ctx.model();
  SolverConfig sc = ctx.solver();
  if (!ctx.cfg.has("solver.xl")) sc.xl = -50.0;
  if (!ctx.cfg.has("solver.xr")) sc.xr = 50.0;
  if (!ctx.cfg.has("solver.dt")) sc.dt = 5e-3;
  const double c = ctx.cfg.get_double("stability.c", 1.0);
  const double t_end = ctx.cfg.get_double("stability.t_end", 30.0);
  const double mean = ctx.cfg.get_double("stability.mean", 0.5);
  const double amp = ctx.cfg.get_double("stability.amp", 0.3);
  const double period = ctx.cfg.get_double("stability.period", 20.0);
  ctx.cfg.reject_unknown();
  ctx.start_event();
  p.validate();
  if (!check_hypotheses(p).h3)
    throw ConfigError("stability: hypothesis H3 fails (b <= 2*chi*mu)");
  if (!(mean - std::abs(amp) > 0.0))
    throw ConfigError("stability: initial datum must be strictly positive (mean > |amp|)");
  if (!(period > 0.0) || !(t_end > 0.0))
    throw ConfigError("stability: period and t_end must be positive");

  auto u0 = sample(sc.xl, sc.xr, sc.n, [&](double x) {
    return mean + amp * std::sin(2.0 * std::acos(-1.0) * x / period);
  });
  Trace tr = run(u0, t_end, sc, p, c);

  auto csv = ctx.open_csv("stability.csv");
  csv << csv_row({"t", "dist_u", "dist_v", "umax", "umin"});
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    csv << csv_row({format_double(tr.t[i]), format_double(tr.dist_u[i]),
                    format_double(tr.dist_v[i]), format_double(tr.u_max[i]),
                    format_double(tr.u_min_probe[i])});

  json res;
  res["event"] = "result";
  res["final_dist_u"] = tr.dist_u.back();
  res["final_dist_v"] = tr.dist_v.back();
  res["final_dist"] = tr.dist_u.back() + tr.dist_v.back();
  res["target_u"] = p.a / p.b;
  res["target_v"] = p.a * p.mu / (p.b * p.lambda);
  ctx.event(std::move(res));
  return 0;
}

// -------------------------------------------------------------------- sweep

struct AxisSpec {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 1;
  double at(std::size_t i) const {
    if (count <= 1) return lo;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
};

AxisSpec parse_axis(const std::string& key, const std::string& text) {
  AxisSpec ax;
  const auto c1 = text.find(':');
  if (c1 == std::string::npos) {
    try {
      ax.lo = ax.hi = std::stod(text);
    } catch (...) {
      throw ConfigError(key + ": expected a number or lo:hi:count, got '" + text + "'");
    }
    ax.count = 1;
    return ax;
  }
  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw ConfigError(key + ": expected lo:hi:count, got '" + text + "'");
  try {
    ax.lo = std::stod(text.substr(0, c1));
    ax.hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    const long long cnt = std::stoll(text.substr(c2 + 1));
    if (cnt < 1) throw std::invalid_argument("count");
    ax.count = static_cast<std::size_t>(cnt);
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    throw ConfigError(key + ": expected lo:hi:count, got '" + text + "'");
  }
  return ax;
}

int cmd_sweep(Ctx& ctx) {
  const SystemParams base = ctx.model();
  const AxisSpec tau_ax = parse_axis("sweep.tau", ctx.cfg.get_string("sweep.tau", "0:2:9"));
  const AxisSpec chi_ax = parse_axis("sweep.chi", ctx.cfg.get_string("sweep.chi", "0:0.3:4"));
  const bool measure = ctx.cfg.get_bool("sweep.measure_speed", false);
  const double t_end = ctx.cfg.get_double("sweep.t_end", 30.0);
  SolverConfig sc = ctx.solver();
  if (!ctx.cfg.has("solver.xl")) sc.xl = -80.0;
  if (!ctx.cfg.has("solver.xr")) sc.xr = 80.0;
  if (!ctx.cfg.has("solver.n")) sc.n = 2048;
  if (!ctx.cfg.has("solver.dt")) sc.dt = 1e-2;
  ctx.cfg.reject_unknown();
  ctx.start_event();
  base.validate();

  const std::size_t cells = tau_ax.count * chi_ax.count;
  if (cells > 10000) throw ConfigError("sweep: grid has " + std::to_string(cells) +
                                       " cells, limit is 10000");

  struct Row {
    double tau = 0.0, chi = 0.0;
    std::string text;
  };
  std::vector<Row> rows(cells);

  auto run_cell = [&](std::size_t idx) {
    Row& row = rows[idx];
    row.tau = tau_ax.at(idx / chi_ax.count);
    row.chi = chi_ax.at(idx % chi_ax.count);
    SystemParams p = base;
    p.tau = row.tau;
    p.chi = row.chi;
    std::string speed_cell;
    std::string status = "ok";
    Thresholds th;
    Hypotheses h;
    try {
      th = thresholds(p);
      h = check_hypotheses(p);
      if (measure) {
        if (!h.h1) throw ConfigError("hypothesis H1 fails (b <= chi*mu)");
        auto u0 = sample(sc.xl, sc.xr, sc.n, [&](double x) {
          const double s = 1.0 - (x / 5.0) * (x / 5.0);
          return s > 0.0 ? (p.a / p.b) * s * s : 0.0;
        });
        TraceSpec ts;
        ts.sample_dt = 0.5;
        Trace tr = run(u0, t_end, sc, p, 0.0, ts);
        SpeedFit fit = spreading_speed(tr, 0.5 * t_end, t_end);
        speed_cell = format_double(fit.slope);
      }
    } catch (const std::exception& e) {
      status = std::string("failed:") + e.what();
    }
    row.text = csv_row({format_double(row.tau), format_double(row.chi),
                        format_double(th.kappa_star), format_double(th.c_star),
                        format_double(th.b_star), fmt_bool(h.h1), fmt_bool(h.h2),
                        fmt_bool(h.h3), fmt_bool(h.h4), speed_cell, status});
  };

  unsigned workers = ctx.threads;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, cells));
  if (workers <= 1) {
    for (std::size_t i = 0; i < cells; ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < cells; i = next.fetch_add(1)) run_cell(i);
      });
    for (auto& t : pool) t.join();
  }

  auto csv = ctx.open_csv("sweep.csv");
  csv << csv_row({"tau", "chi", "kappa_star", "c_star", "b_star", "h1", "h2", "h3", "h4",
                  "speed", "status"});
  std::size_t failed = 0;
  for (const auto& row : rows) {
    csv << row.text;
    if (row.text.find(",ok\n") == std::string::npos) ++failed;
  }

  json res;
  res["event"] = "result";
  res["cells"] = cells;
  res["failed_cells"] = failed;
  ctx.event(std::move(res));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for logistic Keller-Segel traveling waves"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  app.add_option("--config", config_path, "path to a key=value config file");
  app.add_option("--out", out_dir, "output directory (created if missing)");
  app.add_option("--seed", seed, "seed for randomized checks");
  app.add_option("--threads", threads, "worker threads for sweeps (0 = hardware)");

  auto* sub_constants = app.add_subcommand("constants", "closed-form thresholds and hypotheses");
  auto* sub_kernel = app.add_subcommand("kernel-test", "quadrature self-checks for the chemical field");
  auto* sub_wave = app.add_subcommand("wave", "construct a traveling wave by monotone iteration");
  auto* sub_speed = app.add_subcommand("speed", "measure spreading speed or front drift");
  auto* sub_stability = app.add_subcommand("stability", "relaxation to the constant state");
  auto* sub_sweep = app.add_subcommand("sweep", "threshold/hypothesis grid over (tau, chi)");
  for (auto* sub : {sub_constants, sub_kernel, sub_wave, sub_speed, sub_stability, sub_sweep})
    sub->fallthrough();  // let --config/--out/--seed/--threads follow the subcommand

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  Ctx ctx;
  ctx.seed = seed;
  ctx.threads = threads;
  ctx.out = out_dir;
  int (*handler)(Ctx&) = nullptr;
  if (sub_constants->parsed()) { ctx.command = "constants"; handler = cmd_constants; }
  else if (sub_kernel->parsed()) { ctx.command = "kernel-test"; handler = cmd_kernel_test; }
  else if (sub_wave->parsed()) { ctx.command = "wave"; handler = cmd_wave; }
  else if (sub_speed->parsed()) { ctx.command = "speed"; handler = cmd_speed; }
  else if (sub_stability->parsed()) { ctx.command = "stability"; handler = cmd_stability; }
  else if (sub_sweep->parsed()) { ctx.command = "sweep"; handler = cmd_sweep; }

  try {
    std::filesystem::create_directories(ctx.out);
    ctx.log.open(ctx.out / "run.ndjson", std::ios::binary);
    if (!ctx.log) throw RuntimeFailure("cannot open " + (ctx.out / "run.ndjson").string());
    if (!config_path.empty()) ctx.cfg = RunConfig::load(config_path);
    const int code = handler(ctx);
    json done;
    done["event"] = "exit";
    done["code"] = code;
    ctx.event(std::move(done));
    return code;
  } catch (const ConfigError& e) {
    if (ctx.log.is_open()) {
      json err;
      err["event"] = "error";
      err["kind"] = "config";
      err["message"] = e.what();
      ctx.event(std::move(err));
    }
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    if (ctx.log.is_open()) {
      json err;
      err["event"] = "error";
      err["kind"] = "runtime";
      err["message"] = e.what();
      ctx.event(std::move(err));
    }
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
