#include "wireflow/model.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "wireflow/errors.hpp"

namespace wireflow {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double kahan_sum(const std::vector<double>& v) {
  double sum = 0.0, carry = 0.0;
  for (double x : v) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

void check_state(const AngleDensityState& state, const ModelParams& params) {
  if (!(state.theta.grid() == state.rho.grid()))
    throw ValidationError("theta and rho live on different grids");
  if (state.theta.grid().length != params.length)
    throw ValidationError("state grid length does not match model length");
  if (state.omega != params.omega)
    throw ValidationError("state winding does not match model winding");
}

struct TrigTables {
  std::vector<double> sin_t;
  std::vector<double> cos_t;
};

TrigTables trig_tables(const Field& theta) {
  const std::size_t n = theta.values().size();
  TrigTables t;
  t.sin_t.resize(n);
  t.cos_t.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.sin_t[i] = std::sin(theta.values()[i]);
    t.cos_t[i] = std::cos(theta.values()[i]);
  }
  return t;
}

/// Shared per-state geometry: midpoint slopes, midpoint stiffness, fluxes.
struct FluxData {
  std::vector<double> dtheta_mid;  // (theta_{i+1} - theta_i)/h with seam jump
  std::vector<double> beta_mid;    // averaged stiffness on midpoints
  std::vector<double> flux;        // beta_mid * (dtheta_mid - c0)
};

FluxData flux_data(const AngleDensityState& state, const ModelParams& params) {
  FluxData f;
  f.dtheta_mid = detail::midpoint_slopes(state.theta, state.omega);
  f.beta_mid = detail::midpoint_beta(state.rho, params.beta);
  const std::size_t n = f.dtheta_mid.size();
  f.flux.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    f.flux[i] = f.beta_mid[i] * (f.dtheta_mid[i] - params.c0);
  return f;
}

/// Angle part of the energy gradient: g_j = -(F_j - F_{j-1})/h.
Field theta_gradient_from_flux(const Grid& grid, const std::vector<double>& flux) {
  const int n = grid.n;
  const double invh = 1.0 / grid.h;
  Field g(grid);
  for (int j = 0; j < n; ++j) {
    const int jm = (j == 0) ? n - 1 : j - 1;
    g[j] = -(flux[static_cast<std::size_t>(j)] - flux[static_cast<std::size_t>(jm)]) * invh;
  }
  return g;
}

/// Density part: g_j = -mu * deriv2(rho)_j + 1/4 beta'(rho_j) *
/// [(d_j - c0)^2 + (d_{j-1} - c0)^2]  (exact derivative of the midpoint sum).
Field rho_gradient(const AngleDensityState& state, const ModelParams& params,
                   const FluxData& f) {
  const Grid& grid = state.rho.grid();
  const int n = grid.n;
  Field d2 = deriv2(state.rho);
  Field g(grid);
  for (int j = 0; j < n; ++j) {
    const int jm = (j == 0) ? n - 1 : j - 1;
    const double dj = f.dtheta_mid[static_cast<std::size_t>(j)] - params.c0;
    const double djm = f.dtheta_mid[static_cast<std::size_t>(jm)] - params.c0;
    const double bp = params.beta.eval(state.rho[j]).first;
    g[j] = -params.mu * d2[j] + 0.25 * bp * (dj * dj + djm * djm);
  }
  return g;
}

struct TangentialSolve {
  double lam1 = 0.0;
  double lam2 = 0.0;
  PiMatrix pi;
};

PiMatrix pi_from_trig(const Grid& grid, const TrigTables& t) {
  const std::size_t n = t.sin_t.size();
  std::vector<double> ss(n), sc(n), cc(n);
  for (std::size_t i = 0; i < n; ++i) {
    ss[i] = t.sin_t[i] * t.sin_t[i];
    sc[i] = t.sin_t[i] * t.cos_t[i];
    cc[i] = t.cos_t[i] * t.cos_t[i];
  }
  PiMatrix pi;
  pi.a11 = grid.h * kahan_sum(ss);
  pi.a12 = -grid.h * kahan_sum(sc);
  pi.a22 = grid.h * kahan_sum(cc);
  pi.det = pi.a11 * pi.a22 - pi.a12 * pi.a12;
  return pi;
}

/// Solves Pi * (lam1, lam2) = J for the closure multipliers, where
/// J = (<sin, g_theta>, -<cos, g_theta>) makes the constrained velocity
/// exactly quadrature-orthogonal to the closure constraint gradients.
TangentialSolve tangential_multipliers(const Grid& grid, const TrigTables& t,
                                       const Field& g_theta, double length) {
  TangentialSolve out;
  out.pi = pi_from_trig(grid, t);
  if (out.pi.det < pi_det_floor(length))
    throw DegeneratePiError("closure Gram matrix is numerically singular (det = " +
                            std::to_string(out.pi.det) + ")");
  const std::size_t n = t.sin_t.size();
  std::vector<double> sg(n), cg(n);
  for (std::size_t i = 0; i < n; ++i) {
    sg[i] = t.sin_t[i] * g_theta.values()[i];
    cg[i] = t.cos_t[i] * g_theta.values()[i];
  }
  const double j1 = grid.h * kahan_sum(sg);
  const double j2 = -grid.h * kahan_sum(cg);
  out.lam1 = (j1 * out.pi.a22 - j2 * out.pi.a12) / out.pi.det;
  out.lam2 = (out.pi.a11 * j2 - out.pi.a12 * j1) / out.pi.det;
  return out;
}

double mass_multiplier(const AngleDensityState& state, const ModelParams& params,
                       const FluxData& f) {
  const Grid& grid = state.rho.grid();
  const int n = grid.n;
  std::vector<double> bw(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const int jm = (j == 0) ? n - 1 : j - 1;
    const double dj = f.dtheta_mid[static_cast<std::size_t>(j)] - params.c0;
    const double djm = f.dtheta_mid[static_cast<std::size_t>(jm)] - params.c0;
    const double bp = params.beta.eval(state.rho[j]).first;
    bw[static_cast<std::size_t>(j)] = bp * 0.5 * (dj * dj + djm * djm);
  }
  return -grid.h * kahan_sum(bw) / (2.0 * params.length);
}

}  // namespace

namespace detail {

std::vector<double> midpoint_slopes(const Field& theta, int omega) {
  const Grid& g = theta.grid();
  const int n = g.n;
  const double invh = 1.0 / g.h;
  const double jump = kTwoPi * static_cast<double>(omega);
  std::vector<double> d(static_cast<std::size_t>(n));
  for (int i = 0; i + 1 < n; ++i)
    d[static_cast<std::size_t>(i)] = (theta[i + 1] - theta[i]) * invh;
  d[static_cast<std::size_t>(n - 1)] = ((theta[0] + jump) - theta[n - 1]) * invh;
  return d;
}

std::vector<double> midpoint_slopes_periodic(const Field& f) {
  const Grid& g = f.grid();
  const int n = g.n;
  const double invh = 1.0 / g.h;
  std::vector<double> d(static_cast<std::size_t>(n));
  for (int i = 0; i + 1 < n; ++i)
    d[static_cast<std::size_t>(i)] = (f[i + 1] - f[i]) * invh;
  d[static_cast<std::size_t>(n - 1)] = (f[0] - f[n - 1]) * invh;
  return d;
}

std::vector<double> midpoint_beta(const Field& rho, const StiffnessProfile& beta) {
  const int n = rho.grid().n;
  std::vector<double> b(static_cast<std::size_t>(n));
  std::vector<double> nodal(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) nodal[static_cast<std::size_t>(i)] = beta.eval(rho[i]).value;
  for (int i = 0; i < n; ++i) {
    const int ip = (i + 1 == n) ? 0 : i + 1;
    b[static_cast<std::size_t>(i)] =
        0.5 * (nodal[static_cast<std::size_t>(i)] + nodal[static_cast<std::size_t>(ip)]);
  }
  return b;
}

}  // namespace detail

void ModelParams::validate() const {
  if (!std::isfinite(length) || length <= 0.0)
    throw ValidationError("model length must be positive and finite");
  if (!std::isfinite(mu) || mu <= 0.0) throw ValidationError("mu must be positive and finite");
  if (!std::isfinite(c0)) throw ValidationError("c0 must be finite");
  if (!std::isfinite(mass)) throw ValidationError("mass must be finite");
}

double pi_det_floor(double length) { return 1e-12 * length * length; }

double energy(const AngleDensityState& state, const ModelParams& params) {
  check_state(state, params);
  const Grid& grid = state.theta.grid();
  const FluxData f = flux_data(state, params);
  const std::vector<double> drho = detail::midpoint_slopes_periodic(state.rho);
  const std::size_t n = f.dtheta_mid.size();
  std::vector<double> density(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double defect = f.dtheta_mid[i] - params.c0;
    density[i] = f.beta_mid[i] * defect * defect + params.mu * drho[i] * drho[i];
  }
  return 0.5 * grid.h * kahan_sum(density);
}

EnergyGradient gradient(const AngleDensityState& state, const ModelParams& params) {
  check_state(state, params);
  const FluxData f = flux_data(state, params);
  EnergyGradient g;
  g.theta = theta_gradient_from_flux(state.theta.grid(), f.flux);
  g.rho = rho_gradient(state, params, f);
  return g;
}

PiMatrix pi_matrix(const AngleDensityState& state) {
  const TrigTables t = trig_tables(state.theta);
  return pi_from_trig(state.theta.grid(), t);
}

ConstraintValues constraint_values(const AngleDensityState& state, const ModelParams& params) {
  check_state(state, params);
  const TrigTables t = trig_tables(state.theta);
  const Grid& grid = state.theta.grid();
  ConstraintValues c;
  c.gcos = grid.h * kahan_sum(t.cos_t);
  c.gsin = grid.h * kahan_sum(t.sin_t);
  c.gmass = integrate(state.rho) - params.mass;
  return c;
}

Multipliers multipliers(const AngleDensityState& state, const ModelParams& params) {
  check_state(state, params);
  const FluxData f = flux_data(state, params);
  const Field g_theta = theta_gradient_from_flux(state.theta.grid(), f.flux);
  const TrigTables t = trig_tables(state.theta);
  const TangentialSolve ts =
      tangential_multipliers(state.theta.grid(), t, g_theta, params.length);
  Multipliers m;
  m.lam_theta1 = ts.lam1;
  m.lam_theta2 = ts.lam2;
  m.lam_rho = mass_multiplier(state, params, f);
  return m;
}

FlowRhs flow_rhs(const AngleDensityState& state, const ModelParams& params) {
  check_state(state, params);
  const Grid& grid = state.theta.grid();
  const FluxData f = flux_data(state, params);
  const Field g_theta = theta_gradient_from_flux(grid, f.flux);
  const Field g_rho = rho_gradient(state, params, f);
  const TrigTables t = trig_tables(state.theta);
  const TangentialSolve ts = tangential_multipliers(grid, t, g_theta, params.length);
  const double lam_rho = mass_multiplier(state, params, f);

  FlowRhs out;
  out.dtheta = Field(grid);
  out.drho = Field(grid);
  const int n = grid.n;
  for (int j = 0; j < n; ++j) {
    const std::size_t sj = static_cast<std::size_t>(j);
    out.dtheta[j] = -g_theta[j] + ts.lam1 * t.sin_t[sj] - ts.lam2 * t.cos_t[sj];
    out.drho[j] = -g_rho[j] - lam_rho;
  }
  out.mult.lam_theta1 = ts.lam1;
  out.mult.lam_theta2 = ts.lam2;
  out.mult.lam_rho = lam_rho;
  out.pi = ts.pi;
  return out;
}

AngleDensityState project_closure(const AngleDensityState& state, const ModelParams& params,
                                  double tol, int max_iter) {
  check_state(state, params);
  if (!(tol > 0.0)) throw ValidationError("projection tolerance must be positive");
  const Grid& grid = state.theta.grid();
  AngleDensityState out = state;

  auto defects = [&](const Field& theta) {
    const TrigTables t = trig_tables(theta);
    const double gcos = grid.h * kahan_sum(t.cos_t);
    const double gsin = grid.h * kahan_sum(t.sin_t);
    return std::array<double, 2>{gcos, gsin};
  };

  std::array<double, 2> g = defects(out.theta);
  double norm = std::hypot(g[0], g[1]);
  const double gmass0 = integrate(out.rho) - params.mass;

  if (norm <= tol && std::abs(gmass0) <= tol * std::max(1.0, std::abs(params.mass)))
    return out;  // already projected; zero iterations, state untouched

  bool converged = norm <= tol;
  for (int iter = 0; iter < max_iter && !converged; ++iter) {
    const TrigTables t = trig_tables(out.theta);
    const PiMatrix pi = pi_from_trig(grid, t);
    if (pi.det < pi_det_floor(params.length))
      throw DegeneratePiError("closure projection hit a degenerate Gram matrix");
    // Newton step for theta -> theta + a sin(theta) - b cos(theta); the
    // Jacobian of the defect pair in (a, b) is -Pi.
    double a = (g[0] * pi.a22 - g[1] * pi.a12) / pi.det;
    double b = (pi.a11 * g[1] - pi.a12 * g[0]) / pi.det;

    // Backtrack if a full step does not reduce the defect (far-field starts).
    bool accepted = false;
    for (int half = 0; half < 10 && !accepted; ++half) {
      Field trial = out.theta;
      for (int i = 0; i < grid.n; ++i) {
        const std::size_t si = static_cast<std::size_t>(i);
        trial[i] += a * t.sin_t[si] - b * t.cos_t[si];
      }
      const std::array<double, 2> gt = defects(trial);
      const double trial_norm = std::hypot(gt[0], gt[1]);
      if (trial_norm < norm || trial_norm <= tol) {
        out.theta = std::move(trial);
        g = gt;
        norm = trial_norm;
        accepted = true;
      } else {
        a *= 0.5;
        b *= 0.5;
      }
    }
    if (!accepted)
      throw NoConvergenceError("closure projection stalled at defect " + std::to_string(norm));
    converged = norm <= tol;
  }
  if (!converged)
    throw NoConvergenceError("closure projection did not reach tolerance " +
                             std::to_string(tol) + " (defect " + std::to_string(norm) + ")");

  // Constant density shift restores the mass constraint exactly.
  const double gmass = integrate(out.rho) - params.mass;
  const double shift = -gmass / (grid.h * static_cast<double>(grid.n));
  for (int i = 0; i < grid.n; ++i) out.rho[i] += shift;
  return out;
}

CurvePolyline reconstruct_curve(const AngleDensityState& state,
                                const std::array<double, 2>& base_point) {
  const Grid& grid = state.theta.grid();
  const int n = grid.n;
  const double jump = kTwoPi * static_cast<double>(state.omega);
  CurvePolyline curve;
  curve.points.resize(static_cast<std::size_t>(n) + 1);
  curve.points[0] = base_point;
  for (int i = 0; i < n; ++i) {
    const double next = (i + 1 == n) ? state.theta[0] + jump : state.theta[i + 1];
    const double mid = 0.5 * (state.theta[i] + next);
    const auto& p = curve.points[static_cast<std::size_t>(i)];
    curve.points[static_cast<std::size_t>(i) + 1] = {p[0] + grid.h * std::cos(mid),
                                                     p[1] + grid.h * std::sin(mid)};
  }
  const auto& first = curve.points.front();
  const auto& last = curve.points.back();
  curve.closure_gap = std::hypot(last[0] - first[0], last[1] - first[1]);
  return curve;
}

int winding(const AngleDensityState& state) { return state.omega; }

int verify_winding(const AngleDensityState& state) {
  const int n = state.theta.grid().n;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double next = (i + 1 == n) ? state.theta[0] : state.theta[i + 1];
    total += std::remainder(next - state.theta[i], kTwoPi);
  }
  const double w = total / kTwoPi;
  const long recomputed = std::lround(w);
  if (std::abs(w - static_cast<double>(recomputed)) > 0.25)
    throw ValidationError("winding recomputation is not close to an integer; "
                          "angle increments under-resolved");
  if (recomputed != state.omega)
    throw ValidationError("stored winding " + std::to_string(state.omega) +
                          " does not match recomputed " + std::to_string(recomputed));
  return static_cast<int>(recomputed);
}

double mean_theta(const AngleDensityState& state) { return integrate(state.theta); }

double pair_norm_sq(const Field& a, const Field& b) { return inner(a, a) + inner(b, b); }

double pair_norm(const Field& a, const Field& b) { return std::sqrt(pair_norm_sq(a, b)); }

}  // namespace wireflow
