#ifndef WIREFLOW_MODEL_HPP
#define WIREFLOW_MODEL_HPP

#include <array>
#include <vector>

#include "wireflow/grid.hpp"
#include "wireflow/stiffness.hpp"

namespace wireflow {

/// Fixed model data of one evolution problem.
struct ModelParams {
  double length = 6.283185307179586;  ///< curve length L
  double mu = 1.0;                    ///< density diffusion weight
  double c0 = 0.0;                    ///< spontaneous curvature
  int omega = 1;                      ///< winding (turning) number
  StiffnessProfile beta;              ///< curvature stiffness beta(rho)
  double mass = 6.283185307179586;    ///< conserved total density

  void validate() const;
};

/// Evolving unknowns: inclination angle theta (periodic modulo a seam jump of
/// 2*pi*omega) and density rho, sampled on one arc-length period.
struct AngleDensityState {
  Field theta;
  Field rho;
  int omega = 1;
  double time = 0.0;
};

/// Nonlocal multipliers enforcing closure (lam_theta1/2) and mass (lam_rho).
struct Multipliers {
  double lam_theta1 = 0.0;
  double lam_theta2 = 0.0;
  double lam_rho = 0.0;
};

/// Gram matrix of the closure constraint gradients,
///   [ int sin^2      -int sin cos ]
///   [ -int sin cos    int cos^2   ],
/// with its determinant.
struct PiMatrix {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;
  double det = 0.0;
};

/// Smallest admissible det(Pi) before the multiplier solve is declared
/// degenerate: 1e-12 * L^2.
double pi_det_floor(double length);

/// Constraint values: g_cos = int cos(theta), g_sin = int sin(theta),
/// g_mass = int rho - mass.
struct ConstraintValues {
  double gcos = 0.0;
  double gsin = 0.0;
  double gmass = 0.0;
};

/// Unconstrained variational derivatives of the energy (no multiplier terms),
/// in the quadrature L^2 metric.
struct EnergyGradient {
  Field theta;
  Field rho;
};

/// Full constrained flow velocity together with the multipliers it used.
struct FlowRhs {
  Field dtheta;
  Field drho;
  Multipliers mult;
  PiMatrix pi;
};

/// Reconstructed closed polyline of the curve (n+1 points; the last point
/// closes up to quadrature error, reported as closure_gap).
struct CurvePolyline {
  std::vector<std::array<double, 2>> points;
  double closure_gap = 0.0;
};

/// Elastic plus diffusion energy
///   E = 1/2 int [ beta(rho) (kappa - c0)^2 + mu (d rho/ds)^2 ] ds
/// discretized compatibly: differences and stiffness averages live on cell
/// midpoints, so `gradient` below is the exact derivative of this sum and the
/// semi-implicit flux stencil is its linearization.
double energy(const AngleDensityState& state, const ModelParams& params);

/// Exact discrete gradient of `energy` in the quadrature L^2 metric.
EnergyGradient gradient(const AngleDensityState& state, const ModelParams& params);

PiMatrix pi_matrix(const AngleDensityState& state);

ConstraintValues constraint_values(const AngleDensityState& state, const ModelParams& params);

/// Closure/mass multipliers.  The tangential pair solves Pi * lam = J where J
/// collects the integrated-by-parts defect derivatives, so the flow velocity
/// is exactly quadrature-orthogonal to the closure constraint gradients.
/// Throws DegeneratePiError when det(Pi) < pi_det_floor(L).
Multipliers multipliers(const AngleDensityState& state, const ModelParams& params);

/// Constrained flow velocity: flow_rhs = -gradient - lam . (constraint
/// gradients).  The density component has exactly zero quadrature mean.
FlowRhs flow_rhs(const AngleDensityState& state, const ModelParams& params);

/// Newton projection onto the closure constraints using corrections along
/// span{sin theta, cos theta} (Jacobian = Pi), then a constant density shift
/// restoring the mass exactly.  Does not change the winding number.
AngleDensityState project_closure(const AngleDensityState& state, const ModelParams& params,
                                  double tol = 1e-12, int max_iter = 8);

/// Integrates the unit tangent with the midpoint-angle rule from base_point.
CurvePolyline reconstruct_curve(const AngleDensityState& state,
                                const std::array<double, 2>& base_point = {0.0, 0.0});

/// Stored winding number.
int winding(const AngleDensityState& state);

/// Recomputes the winding number from principal-value angle increments and
/// checks it against the stored one; throws ValidationError on mismatch.
int verify_winding(const AngleDensityState& state);

/// Quadrature mean integral int theta ds (conserved along the flow).
double mean_theta(const AngleDensityState& state);

/// Squared L2 norm |a|^2 + |b|^2 of a velocity pair in the quadrature metric.
double pair_norm_sq(const Field& a, const Field& b);

/// sqrt(pair_norm_sq(a, b)); the single call path for every velocity norm.
double pair_norm(const Field& a, const Field& b);

namespace detail {
/// Midpoint slopes d_i = (theta_{i+1} - theta_i)/h with the 2*pi*omega seam
/// jump applied to the wraparound difference.  Length n; entry i lives on the
/// midpoint between nodes i and i+1.
std::vector<double> midpoint_slopes(const Field& theta, int omega);
/// Midpoint slopes of a plain periodic field (no seam).
std::vector<double> midpoint_slopes_periodic(const Field& f);
/// Midpoint stiffness averages b_{i+1/2} = (beta(rho_i) + beta(rho_{i+1}))/2.
std::vector<double> midpoint_beta(const Field& rho, const StiffnessProfile& beta);
}  // namespace detail

}  // namespace wireflow

#endif  // WIREFLOW_MODEL_HPP
