#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "kslab/grid.hpp"
#include "kslab/kernel.hpp"
#include "kslab/params.hpp"

namespace kslab {

enum class Scheme { Imex, Explicit };

/// Spatial discretization of the drift term.  Centered keeps the scheme
/// second order and leaves the slow exponential tail mode slightly damped;
/// Upwind is first order but monotone, useful where a discrete comparison
/// principle is wanted.  Cell Peclet numbers stay far below 1 at the grid
/// resolutions used here, so Centered is the default.
enum class Advection { Centered, Upwind };

enum class LeftBc { NoFlux, Fixed };

/// Zero pins the last node to 0; Extrapolate places a ghost node at
/// u_last * exp(-rate*dx) (rate 0 gives a constant extension).
enum class RightBc { Zero, Extrapolate };

enum class Coupling { SelfConsistent, Frozen };

struct SolverConfig {
  double xl = -40.0;
  double xr = 80.0;
  std::size_t n = 2048;
  double dt = 2e-3;
  Scheme scheme = Scheme::Imex;
  Advection advection = Advection::Centered;
  LeftBc left_bc = LeftBc::NoFlux;
  double left_value = 0.0;
  RightBc right_bc = RightBc::Extrapolate;
  double right_rate = 0.0;
  Coupling coupling = Coupling::SelfConsistent;
  double blowup_cap = 100.0;
  double clip_abort_fraction = 1e-6;

  void validate(const SystemParams& p) const;
  GridFunction grid() const { return make_grid(xl, xr, n); }

  /// Tail extension consistent with the boundary conditions.
  TailModel tails_for(const GridFunction& u) const;
};

struct SolverState {
  double t = 0.0;
  GridFunction u;
  PsiField psi;
  double clipped_last = 0.0;   ///< mass removed by negativity clipping, last step
  double clipped_total = 0.0;  ///< accumulated over the run
};

SolverState make_state(const GridFunction& u0, const SolverConfig& cfg,
                       const SystemParams& p, double c);

/// Frozen-coupling state: the chemical field is taken from the supplied
/// environment profile and never recomputed.
SolverState make_state_frozen(const GridFunction& u0, const GridFunction& u_env,
                              const SolverConfig& cfg, const SystemParams& p, double c);

/// Semi-discrete right-hand side at the current state: centered diffusion,
/// drift per cfg.advection on the sign of (c - chi*psi_x), explicit logistic
/// reaction.  Pinned boundary nodes report 0.
GridFunction rhs(const SolverState& s, const SolverConfig& cfg,
                 const SystemParams& p, double c);

/// One time step.  IMEX treats diffusion implicitly (tridiagonal solve) and
/// drift/reaction explicitly; Explicit advances everything forward Euler.
/// Enforces the step-size gates dt <= 0.4*dx/max|c - chi*psi_x| and, for the
/// explicit scheme, dt <= 0.4*dx^2/2.  Negative undershoots are clipped and
/// logged; the step aborts if clipped mass exceeds clip_abort_fraction of the
/// total.  Blow-up beyond blowup_cap raises BlowupError with t and profile.
void step(SolverState& s, const SolverConfig& cfg, const SystemParams& p, double c);

struct TraceSpec {
  double sample_dt = 0.5;
  double level = -1.0;      ///< front-crossing level; <= 0 picks a/(2b)
  double probe_lo = 1.0;    ///< probe window for the minimum; lo > hi selects
  double probe_hi = -1.0;   ///< the full domain
  double target_u = -1.0;   ///< reference state for dist_u; < 0 picks a/b
  double target_v = -1.0;   ///< reference state for dist_v; < 0 picks a*mu/(b*lambda)
};

struct Trace {
  std::vector<double> t;
  std::vector<double> u_max;
  std::vector<double> u_min_probe;
  std::vector<double> front;  ///< NaN where no crossing exists
  std::vector<double> dist_u;
  std::vector<double> dist_v;
  double running_max = 0.0;   ///< max of u over every step, not just samples
  double level = 0.0;
};

Trace run(const GridFunction& u0, double t_end, const SolverConfig& cfg,
          const SystemParams& p, double c, const TraceSpec& spec = {});

/// Rightmost crossing of the given level, located by linear interpolation.
std::optional<double> front_position(const GridFunction& u, double level);

struct SpeedFit {
  double slope;
  double std_error;
  double intercept;
  std::size_t n_samples;
};

/// Least-squares slope of front position against time over [t1, t2].
/// Requires at least 8 valid samples in the window.
SpeedFit spreading_speed(const Trace& trace, double t1, double t2);

}  // namespace kslab
