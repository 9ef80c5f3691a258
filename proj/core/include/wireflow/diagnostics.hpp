#pragma once

#include <functional>
#include <vector>

#include "wireflow/flow.hpp"

namespace wireflow {

/// Checks the discrete energy balance of a recorded trajectory: energy must
/// never increase beyond roundoff, and the difference quotient of the energy
/// must match the recorded dissipation rate step by step.  The residual of
/// step n is |(E_n - E_{n-1})/dt_n + D_n| with D_n the recorded dissipation.
struct DissipationAudit {
  bool energy_monotone = true;
  double max_energy_increase = 0.0;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  /// max of residual / (1 + D), the scale-free form the step controller uses.
  double max_relative_residual = 0.0;
  std::vector<double> residuals;  ///< one entry per recorded step
};

DissipationAudit dissipation_audit(const Trajectory& traj);

/// Checks the invariants the scheme is built to preserve: angle mean, total
/// mass, closure defects, and the winding number of every stored snapshot.
struct ConservationAudit {
  double max_mean_theta_drift = 0.0;
  double max_abs_gcos = 0.0;
  double max_abs_gsin = 0.0;
  double max_abs_gmass = 0.0;
  bool winding_constant = true;
};

ConservationAudit conservation_audit(const Trajectory& traj);

/// Self-convergence study of the spatial discretization.  The same initial
/// family is evolved on nested grids with fixed steps scaled as dt ~ h^2 and
/// each solution is compared against the next finer run, subsampled to the
/// coarser nodes, at the shared final time.
struct OrderStudyReport {
  std::vector<int> resolutions;   ///< compared grids, ascending; finest excluded
  int reference_n = 0;            ///< finest grid in the study
  std::vector<double> spacings;   ///< h for each compared grid
  std::vector<double> errors_theta;
  std::vector<double> errors_rho;
  std::vector<double> errors_combined;
  double slope = 0.0;             ///< log-log least-squares order estimate
  bool below_noise_floor = false; ///< errors too close to roundoff to fit
};

OrderStudyReport spatial_order_study(
    const std::function<AngleDensityState(const Grid&)>& initial, const ModelParams& params,
    const std::vector<int>& resolutions, double t_end, double dt_coarsest,
    Scheme scheme = Scheme::SemiImplicit);

/// Fits the decay law near a stationary limit: along the flow the gap
/// E - E_inf scales like a power of the velocity norm, and the exponent
/// theta_hat = 1 - 1/slope of the log-log fit is 1/2 in a quadratic basin.
/// Requires a trajectory that stopped as stationary; E_inf is the final
/// energy, points with gap below the 1e-13 noise floor are discarded, and the
/// fit uses the trailing tail_fraction of the remaining points (at least 20,
/// else InsufficientTailError).  Purely empirical — no claim about the true
/// exponent.
struct LojasiewiczProbe {
  double exponent = 0.0;      ///< fitted theta_hat = 1 - 1/slope
  double slope = 0.0;         ///< d log(E - E_inf) / d log(grad_norm)
  double r_squared = 0.0;     ///< coefficient of determination of the fit
  int points_used = 0;
  double energy_limit = 0.0;  ///< E_inf taken from the final record
};

LojasiewiczProbe lojasiewicz_probe(const Trajectory& traj, double tail_fraction = 0.5);

}  // namespace wireflow
