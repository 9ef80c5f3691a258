#include "wireflow/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wireflow/errors.hpp"

namespace wireflow {

namespace {

constexpr double kFdStepScale = 1e-7;
constexpr double kGuardScale = 1e-3;
constexpr int kMaxHalvings = 12;

/// Solve the dense system A x = b by LU with partial pivoting.  A is m x m
/// row-major and consumed in place.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, int m) {
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  const double pivot_floor = 1e-14 * std::max(scale, 1.0);
  for (int k = 0; k < m; ++k) {
    int piv = k;
    double best = std::abs(a[static_cast<size_t>(k) * m + k]);
    for (int i = k + 1; i < m; ++i) {
      const double cand = std::abs(a[static_cast<size_t>(i) * m + k]);
      if (cand > best) {
        best = cand;
        piv = i;
      }
    }
    if (!(best > pivot_floor)) {
      throw SingularJacobianError("critical-point linearization is singular at column " +
                                  std::to_string(k));
    }
    if (piv != k) {
      for (int j = 0; j < m; ++j)
        std::swap(a[static_cast<size_t>(k) * m + j], a[static_cast<size_t>(piv) * m + j]);
      std::swap(b[k], b[piv]);
    }
    const double inv = 1.0 / a[static_cast<size_t>(k) * m + k];
    for (int i = k + 1; i < m; ++i) {
      const double f = a[static_cast<size_t>(i) * m + k] * inv;
      if (f == 0.0) continue;
      a[static_cast<size_t>(i) * m + k] = 0.0;
      for (int j = k + 1; j < m; ++j)
        a[static_cast<size_t>(i) * m + j] -= f * a[static_cast<size_t>(k) * m + j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(static_cast<size_t>(m));
  for (int i = m - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < m; ++j) s -= a[static_cast<size_t>(i) * m + j] * x[j];
    x[i] = s / a[static_cast<size_t>(i) * m + i];
  }
  return x;
}

struct KktUnknowns {
  AngleDensityState state;
  double lam1 = 0.0;
  double lam2 = 0.0;
  double lam_rho = 0.0;
  double lam_gauge = 0.0;
};

/// Residual of the critical-point system: the first 2n entries are the
/// constrained velocity (with free multipliers, plus the gauge force), the
/// last four are the constraint defects including the mean-angle pin.
std::vector<double> kkt_residual(const KktUnknowns& z, const ModelParams& params,
                                 double mean_target) {
  const int n = z.state.theta.grid().n;
  std::vector<double> r(static_cast<size_t>(2 * n + 4));
  const EnergyGradient g = gradient(z.state, params);
  for (int i = 0; i < n; ++i) {
    r[static_cast<size_t>(i)] = -g.theta[i] + z.lam1 * std::sin(z.state.theta[i]) -
                                z.lam2 * std::cos(z.state.theta[i]) - z.lam_gauge;
    r[static_cast<size_t>(n + i)] = -g.rho[i] - z.lam_rho;
  }
  const ConstraintValues c = constraint_values(z.state, params);
  r[static_cast<size_t>(2 * n)] = c.gcos;
  r[static_cast<size_t>(2 * n + 1)] = c.gsin;
  r[static_cast<size_t>(2 * n + 2)] = c.gmass;
  r[static_cast<size_t>(2 * n + 3)] = mean_theta(z.state) - mean_target;
  return r;
}

double max_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Smallest residual magnitude the state representation can express: one unit
/// of least precision in a field entry moves a stiffness-flux residual row by
/// about 4 (beta_max + mu) / h^2 times the entry's ulp, so no representable
/// state can land below a few of those quanta.  Newton iterations that
/// stagnate within this band are converged for double precision even when the
/// requested tol is smaller.
double representation_floor(const AngleDensityState& state, const ModelParams& params) {
  const double h = state.theta.grid().h;
  double beta_max = 0.0;
  for (int i = 0; i < state.rho.size(); ++i)
    beta_max = std::max(beta_max, params.beta(state.rho[i]));
  const double scale = 1.0 + std::max(max_abs(state.theta), max_abs(state.rho));
  const double eps = std::numeric_limits<double>::epsilon();
  return 4.0 * (beta_max + params.mu) / (h * h) * eps * scale;
}

constexpr double kFloorSlack = 4.0;

}  // namespace

StationaryReport stationary_residual(const AngleDensityState& state, const ModelParams& params) {
  const FlowRhs rhs = flow_rhs(state, params);
  StationaryReport rep;
  rep.residual_theta_max = max_abs(rhs.dtheta);
  rep.residual_rho_max = max_abs(rhs.drho);
  rep.residual_l2 = pair_norm(rhs.dtheta, rhs.drho);
  rep.mult = rhs.mult;
  rep.energy = energy(state, params);
  return rep;
}

NewtonRefineResult newton_refine(const AngleDensityState& state, const ModelParams& params,
                                 double tol, int max_iter) {
  if (!(tol > 0.0) || max_iter < 1) throw ValidationError("newton_refine: bad tol or max_iter");
  const Grid& grid = state.theta.grid();
  const int n = grid.n;
  const int m = 2 * n + 4;
  const double h = grid.h;

  const StationaryReport start = stationary_residual(state, params);
  const double state_norm = pair_norm(state.theta, state.rho);
  if (start.residual_l2 > kGuardScale * (1.0 + state_norm)) {
    throw NoConvergenceError("newton_refine: flow residual " + std::to_string(start.residual_l2) +
                             " too far from stationary; evolve the state first");
  }
  const int omega_in = winding(state);
  const double mean_target = mean_theta(state);

  KktUnknowns z{state, start.mult.lam_theta1, start.mult.lam_theta2, start.mult.lam_rho, 0.0};
  std::vector<double> r = kkt_residual(z, params, mean_target);
  double rnorm = max_norm(r);
  int iterations = 0;

  for (int it = 0; it < max_iter && rnorm > tol; ++it) {
    const double fd = kFdStepScale *
                      (1.0 + std::max(max_abs(z.state.theta), max_abs(z.state.rho)));
    std::vector<double> jac(static_cast<size_t>(m) * m, 0.0);
    // Field-field block by finite differences, one column per node value.
    for (int col = 0; col < 2 * n; ++col) {
      KktUnknowns zp = z;
      if (col < n)
        zp.state.theta[col] += fd;
      else
        zp.state.rho[col - n] += fd;
      const std::vector<double> rp = kkt_residual(zp, params, mean_target);
      const double inv_fd = 1.0 / fd;
      for (int row = 0; row < 2 * n; ++row)
        jac[static_cast<size_t>(row) * m + col] = (rp[static_cast<size_t>(row)] -
                                                   r[static_cast<size_t>(row)]) *
                                                  inv_fd;
    }
    // Multiplier columns and constraint rows are linear; fill them exactly.
    for (int i = 0; i < n; ++i) {
      const double si = std::sin(z.state.theta[i]);
      const double ci = std::cos(z.state.theta[i]);
      jac[static_cast<size_t>(i) * m + (2 * n)] = si;
      jac[static_cast<size_t>(i) * m + (2 * n + 1)] = -ci;
      jac[static_cast<size_t>(i) * m + (2 * n + 3)] = -1.0;
      jac[static_cast<size_t>(n + i) * m + (2 * n + 2)] = -1.0;
      jac[static_cast<size_t>(2 * n) * m + i] = -h * si;
      jac[static_cast<size_t>(2 * n + 1) * m + i] = h * ci;
      jac[static_cast<size_t>(2 * n + 2) * m + (n + i)] = h;
      jac[static_cast<size_t>(2 * n + 3) * m + i] = h;
    }
    std::vector<double> neg_r(r.size());
    for (size_t i = 0; i < r.size(); ++i) neg_r[i] = -r[i];
    const std::vector<double> dz = solve_dense(std::move(jac), std::move(neg_r), m);

    double alpha = 1.0;
    bool accepted = false;
    for (int half = 0; half <= kMaxHalvings; ++half) {
      KktUnknowns zt = z;
      for (int i = 0; i < n; ++i) {
        zt.state.theta[i] += alpha * dz[static_cast<size_t>(i)];
        zt.state.rho[i] += alpha * dz[static_cast<size_t>(n + i)];
      }
      zt.lam1 += alpha * dz[static_cast<size_t>(2 * n)];
      zt.lam2 += alpha * dz[static_cast<size_t>(2 * n + 1)];
      zt.lam_rho += alpha * dz[static_cast<size_t>(2 * n + 2)];
      zt.lam_gauge += alpha * dz[static_cast<size_t>(2 * n + 3)];
      std::vector<double> rt = kkt_residual(zt, params, mean_target);
      const double rtnorm = max_norm(rt);
      if (rtnorm < rnorm || rtnorm <= tol) {
        z = std::move(zt);
        r = std::move(rt);
        rnorm = rtnorm;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++iterations;
    if (!accepted) {
      if (rnorm <= kFloorSlack * representation_floor(z.state, params)) break;
      throw NoConvergenceError("newton_refine: line search stalled at residual " +
                               std::to_string(rnorm));
    }
  }
  if (rnorm > tol && rnorm > kFloorSlack * representation_floor(z.state, params)) {
    throw NoConvergenceError("newton_refine: residual " + std::to_string(rnorm) + " above tol " +
                             std::to_string(tol) + " after " + std::to_string(max_iter) +
                             " iterations");
  }
  if (winding(z.state) != omega_in) {
    throw NoConvergenceError("newton_refine: refinement changed the winding number");
  }

  NewtonRefineResult out;
  out.state = z.state;
  out.mult = Multipliers{z.lam1, z.lam2, z.lam_rho};
  out.report = stationary_residual(z.state, params);
  out.iterations = iterations;
  return out;
}

}  // namespace wireflow
