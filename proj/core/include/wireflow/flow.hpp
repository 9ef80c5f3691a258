#ifndef WIREFLOW_FLOW_HPP
#define WIREFLOW_FLOW_HPP

#include <string>
#include <utility>
#include <vector>

#include "wireflow/model.hpp"

namespace wireflow {

enum class Scheme { SemiImplicit, ExplicitRk4 };

std::string scheme_name(Scheme scheme);
Scheme parse_scheme(const std::string& name);

/// Time-stepping controls.
struct FlowConfig {
  double dt_init = 1e-3;
  double dt_min = 1e-9;
  double dt_max = 1e-2;
  double t_end = 10.0;
  double grad_tol = 1e-8;   ///< stop when the L2 norm of the velocity drops below
  int project_every = 1;    ///< closure projection every k-th accepted step (0 = off)
  Scheme scheme = Scheme::SemiImplicit;
  int snapshot_every = 0;   ///< record every k-th accepted state (0 = ends only)

  void validate() const;
};

/// Per-row trajectory record.  All fields describe the recorded state except
/// dt and dissipation, which describe the step that produced it (both zero on
/// the initial row).
struct StepDiagnostics {
  double time = 0.0;
  double dt = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;  ///< quadrature of (dtheta/dt)^2 + (drho/dt)^2
  Multipliers mult;
  double gcos = 0.0;
  double gsin = 0.0;
  double gmass = 0.0;
  double mean_theta = 0.0;
  double grad_norm = 0.0;    ///< L2 norm of the constrained velocity
  double det_pi = 0.0;
};

enum class Terminal { ReachedTEnd, Stationary, StepFailure };

std::string terminal_name(Terminal t);

struct Trajectory {
  std::vector<StepDiagnostics> diagnostics;
  std::vector<AngleDensityState> snapshots;
  Terminal terminal = Terminal::ReachedTEnd;
  long rejected_steps = 0;
};

/// Diagnostics row describing a state at rest (dt and dissipation zero).
StepDiagnostics state_diagnostics(const AngleDensityState& state, const ModelParams& params);

/// One linearly implicit step: the stiffness is frozen at the current
/// density, the multiplier terms are explicit, and each unknown costs one
/// cyclic tridiagonal solve through the same flux stencil as the energy
/// gradient.  Discrete mass is conserved to solver roundoff.
std::pair<AngleDensityState, StepDiagnostics> step_semi_implicit(
    const AngleDensityState& state, const ModelParams& params, double dt);

/// Classical fourth-order Runge-Kutta reference step (multipliers recomputed
/// at every stage).  Throws StabilityViolationError when dt exceeds
/// rk4_stability_limit.
std::pair<AngleDensityState, StepDiagnostics> step_explicit_rk4(
    const AngleDensityState& state, const ModelParams& params, double dt);

/// Parabolic stability bound h^2 / (2 max beta + 2 mu) for the explicit scheme.
double rk4_stability_limit(const AngleDensityState& state, const ModelParams& params);

/// Adaptive descent loop: rejects any step that increases the energy by more
/// than 1e-12 (halving dt, failing below dt_min), grows dt by 1.2 up to
/// dt_max while the dissipation identity residual stays under 1 percent, and
/// stops at t_end or when grad_norm < grad_tol.
Trajectory run_flow(const AngleDensityState& initial, const ModelParams& params,
                    const FlowConfig& config);

}  // namespace wireflow

#endif  // WIREFLOW_FLOW_HPP
