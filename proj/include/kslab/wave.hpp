#pragma once

#include <cstddef>
#include <vector>

#include "kslab/envelope.hpp"
#include "kslab/grid.hpp"
#include "kslab/params.hpp"
#include "kslab/solver.hpp"

namespace kslab {

struct FixedPointConfig {
  double inner_tol = 1e-8;          ///< per-step sup increment that ends an inner run
  double outer_tol = 1e-6;          ///< sup distance between outer iterates at convergence
  double max_inner_time = 300.0;    ///< time horizon before an inner run gives up
  std::size_t max_outer_iters = 60;
  SolverConfig solver;              ///< domain/resolution/step; coupling and BCs overridden
  double eta = -1.0;                ///< <= 0 picks min{kappa/2, (sqrt(a)-kappa)/2}/2
  double shift_factor = 10.0;       ///< multiple of the smallest certified shift
  bool start_lower = false;         ///< seed the outer loop at the lower envelope

  void validate() const;
};

struct InnerResult {
  GridFunction u;                    ///< output profile, clamped into the band
  double envelope_violation = 0.0;   ///< worst band escape before clamping
  double monotonicity_defect = 0.0;  ///< worst positive increment between unit-time snapshots
  double time_used = 0.0;
  std::size_t steps = 0;
  double clipped = 0.0;              ///< mass removed by the solver's negativity clipping
};

/// One application of the fixed-point map: evolve from the upper envelope,
/// with the chemical field frozen at the one generated by u_env, until the
/// per-step sup increment drops below inner_tol.  The evolution must be
/// pointwise non-increasing between unit-time snapshots (defect beyond 1e-8
/// raises DiscretizationFault); exceeding max_inner_time raises
/// ConvergenceError; a band escape beyond 1e-6 raises RuntimeFailure.
InnerResult inner_solve(const GridFunction& u_env, const Envelope& env,
                        const FixedPointConfig& cfg, const SystemParams& p, double c);

struct WaveDiagnostics {
  double residual_u = 0.0;        ///< sup of the stationary u-equation residual, interior
  double residual_v = 0.0;        ///< sup of the elliptic v-equation residual, interior
  double decay_rate = 0.0;        ///< least-squares decay rate over the right quarter
  double plateau_error = 0.0;     ///< |U(xl + 5) - a/b|
  double tail_ratio_drift = 0.0;  ///< relative change of U(x)e^{kappa x}, x = 10/k vs 20/k
  double envelope_violation = 0.0;
  std::size_t outer_iters = 0;
  double outer_delta = 0.0;       ///< final outer increment
  double clipped_mass = 0.0;      ///< accumulated solver clip bookkeeping
};

struct WaveProfile {
  GridFunction u;    ///< wave profile in the moving frame
  GridFunction v;    ///< chemical field generated by u
  GridFunction v_x;  ///< its spatial derivative
  double c = 0.0;
  double kappa = 0.0;
  Envelope envelope;  ///< band used during construction (kappa == 0 => unset)
  WaveDiagnostics diagnostics;
};

/// Outer fixed-point iteration u_{k+1} = inner_solve(u_k) down to outer_tol.
/// Requires b > b_star(tau)*chi*mu and c strictly above c_star(tau).
WaveProfile construct_wave(const SystemParams& p, double c, const FixedPointConfig& cfg);

/// Pointwise residuals of the stationary two-equation system, centered
/// stencils on interior nodes (boundary entries 0).
struct WaveResiduals {
  std::vector<double> res_u;
  std::vector<double> res_v;
};
WaveResiduals wave_residuals(const WaveProfile& w, const SystemParams& p);

/// Recomputes profile diagnostics from scratch: the chemical field is
/// re-evaluated from w.u, residuals/decay/plateau/tail-ratio measured anew.
/// Outer-loop bookkeeping fields are left zero.  Envelope compliance is
/// measured only when w.envelope is set (kappa > 0).
WaveDiagnostics verify_wave(const WaveProfile& w, const SystemParams& p);

struct ProbeReport {
  SpeedFit fit;              ///< front drift regression over [t_end/2, t_end]
  double front_first = 0.0;  ///< first front sample in the window
  double front_last = 0.0;   ///< last front sample
  double t_end = 0.0;
};

/// Self-consistent moving-frame run at speed c from the front-like datum
/// (a/b)*min{1, e^{-kappa0 x}}, reporting the drift of the a/(2b) level set.
/// Positive drift means the front advances in the moving frame (no
/// stationary profile at this speed); drift near zero is consistent with a
/// wave.  kappa0 is kappa_of_speed(a, c) when c > 2*sqrt(a), else 1.5*sqrt(a).
ProbeReport minimal_speed_probe(const SystemParams& p, double c, const SolverConfig& scfg,
                                double t_end = 40.0);

}  // namespace kslab
