#pragma once

#include "wireflow/model.hpp"

namespace wireflow {

/// Residual measures of the constrained flow velocity at a state.  A state is
/// stationary when the velocity vanishes; residual_l2 uses the same norm call
/// path as the trajectory diagnostic grad_norm.
struct StationaryReport {
  double residual_theta_max = 0.0;
  double residual_rho_max = 0.0;
  double residual_l2 = 0.0;
  Multipliers mult;
  double energy = 0.0;
};

StationaryReport stationary_residual(const AngleDensityState& state, const ModelParams& params);

/// Outcome of the Newton corrector.  `mult` are the multiplier unknowns of the
/// critical-point system at the refined state; `report` re-measures the flow
/// residual there through the standard formulas.
struct NewtonRefineResult {
  AngleDensityState state;
  Multipliers mult;
  StationaryReport report;
  int iterations = 0;
};

/// Refine a near-stationary state to a critical point of the constrained
/// energy.  Solves the critical-point system for (theta, rho, multipliers)
/// with Newton iteration on the dense linearization; the rotational degeneracy
/// of the system is removed by pinning the angle mean to its input value via
/// an auxiliary multiplier (zero at any solution).
///
/// Guard: the incoming flow residual must satisfy
/// residual_l2 <= 1e-3 * (1 + state norm); far states raise NoConvergenceError
/// rather than risk silently converging to a different critical point.
/// Throws SingularJacobianError if the linearization loses rank and
/// NoConvergenceError if max_iter Newton steps fail to reach tol (max-norm of
/// the critical-point residual).  Stagnation within a few quanta of the
/// double-precision representation floor ~ 4 (beta_max + mu) eps (1 + |state|)
/// / h^2 counts as converged: below that band no representable state change
/// can move the residual, so a smaller tol is not meaningful.
NewtonRefineResult newton_refine(const AngleDensityState& state, const ModelParams& params,
                                 double tol = 1e-12, int max_iter = 20);

}  // namespace wireflow
