#include "wireflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wireflow/errors.hpp"

namespace wireflow {

namespace {

constexpr double kEnergyIncreaseTol = 1e-12;
constexpr double kGrowResidualGate = 0.01;
constexpr double kGrowFactor = 1.2;
// Projection keeps the recorded closure defects two orders below the 1e-12
// they are audited against; quadratic convergence makes the tighter tolerance
// free (the defect jumps from ~1e-8 to ~1e-15 in one correction).
constexpr double kProjectTol = 1e-14;
constexpr int kProjectMaxIter = 8;

StepDiagnostics diagnostics_with_rhs(const AngleDensityState& state, const ModelParams& params,
                                     const FlowRhs& rhs) {
  StepDiagnostics d;
  d.time = state.time;
  d.energy = energy(state, params);
  d.mult = rhs.mult;
  const ConstraintValues c = constraint_values(state, params);
  d.gcos = c.gcos;
  d.gsin = c.gsin;
  d.gmass = c.gmass;
  d.mean_theta = mean_theta(state);
  d.grad_norm = pair_norm(rhs.dtheta, rhs.drho);
  d.det_pi = rhs.pi.det;
  return d;
}

double dissipation_quotient(const AngleDensityState& before, const AngleDensityState& after,
                            double dt) {
  const Grid& g = before.theta.grid();
  Field dth(g), drh(g);
  const double inv_dt = 1.0 / dt;
  for (int i = 0; i < g.n; ++i) {
    dth[i] = (after.theta[i] - before.theta[i]) * inv_dt;
    drh[i] = (after.rho[i] - before.rho[i]) * inv_dt;
  }
  return pair_norm_sq(dth, drh);
}

AngleDensityState axpy_state(const AngleDensityState& y, double c, const FlowRhs& k) {
  AngleDensityState out = y;
  const int n = y.theta.grid().n;
  for (int i = 0; i < n; ++i) {
    out.theta[i] = y.theta[i] + c * k.dtheta[i];
    out.rho[i] = y.rho[i] + c * k.drho[i];
  }
  return out;
}

}  // namespace

std::string scheme_name(Scheme scheme) {
  return scheme == Scheme::SemiImplicit ? "semi_implicit" : "explicit_rk4";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "semi_implicit") return Scheme::SemiImplicit;
  if (name == "explicit_rk4") return Scheme::ExplicitRk4;
  throw ParseError("unknown scheme '" + name + "' (expected semi_implicit or explicit_rk4)");
}

std::string terminal_name(Terminal t) {
  switch (t) {
    case Terminal::ReachedTEnd: return "reached_t_end";
    case Terminal::Stationary: return "stationary";
    case Terminal::StepFailure: return "step_failure";
  }
  return "unknown";
}

void FlowConfig::validate() const {
  if (!(dt_min > 0.0) || !(dt_init > 0.0) || !(dt_max > 0.0))
    throw ValidationError("time steps must be positive");
  if (dt_min > dt_init || dt_init > dt_max)
    throw ValidationError("time steps must satisfy dt_min <= dt_init <= dt_max");
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw ValidationError("t_end must be positive and finite");
  if (!(grad_tol >= 0.0)) throw ValidationError("grad_tol must be nonnegative");
  if (project_every < 0) throw ValidationError("project_every must be nonnegative");
  if (snapshot_every < 0) throw ValidationError("snapshot_every must be nonnegative");
}

StepDiagnostics state_diagnostics(const AngleDensityState& state, const ModelParams& params) {
  return diagnostics_with_rhs(state, params, flow_rhs(state, params));
}

std::pair<AngleDensityState, StepDiagnostics> step_semi_implicit(
    const AngleDensityState& state, const ModelParams& params, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive and finite");
  const Grid& grid = state.theta.grid();
  const int n = grid.n;
  const double invh2 = 1.0 / (grid.h * grid.h);

  const FlowRhs rhs = flow_rhs(state, params);

  // Angle update: (I - dt D_s(beta^n D_s .)) theta^{n+1} = theta^n + dt *
  // (explicit terms).  Solved in increment form w = theta^{n+1} - theta^n,
  // (I - dt L) w = dt * flow_rhs_theta, which is algebraically identical and
  // keeps conserved sums exact: the seam jump cancels from w entirely.
  const std::vector<double> bmid = detail::midpoint_beta(state.rho, params.beta);
  std::vector<double> sub(static_cast<std::size_t>(n)), diag(static_cast<std::size_t>(n)),
      sup(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const std::size_t sj = static_cast<std::size_t>(j);
    const std::size_t jm = static_cast<std::size_t>((j == 0) ? n - 1 : j - 1);
    sub[sj] = -dt * invh2 * bmid[jm];
    sup[sj] = -dt * invh2 * bmid[sj];
    diag[sj] = 1.0 + dt * invh2 * (bmid[jm] + bmid[sj]);
  }
  Field theta_rhs(grid);
  for (int j = 0; j < n; ++j) theta_rhs[j] = dt * rhs.dtheta[j];
  const Field w = solve_cyclic_tridiag(sub, diag, sup, theta_rhs);

  // Density update: (I - dt mu D2) rho^{n+1} = rho^n + dt * (explicit terms),
  // same increment form.  The explicit term has exactly zero quadrature mean,
  // and the stencil's column sums vanish, so discrete mass is conserved.
  const double c = dt * params.mu * invh2;
  std::vector<double> rsub(static_cast<std::size_t>(n), -c),
      rdiag(static_cast<std::size_t>(n), 1.0 + 2.0 * c), rsup(static_cast<std::size_t>(n), -c);
  Field rho_rhs(grid);
  for (int j = 0; j < n; ++j) rho_rhs[j] = dt * rhs.drho[j];
  const Field v = solve_cyclic_tridiag(rsub, rdiag, rsup, rho_rhs);

  AngleDensityState next = state;
  for (int j = 0; j < n; ++j) {
    next.theta[j] = state.theta[j] + w[j];
    next.rho[j] = state.rho[j] + v[j];
  }
  next.time = state.time + dt;

  StepDiagnostics d = state_diagnostics(next, params);
  d.dt = dt;
  d.dissipation = dissipation_quotient(state, next, dt);
  return {std::move(next), d};
}

double rk4_stability_limit(const AngleDensityState& state, const ModelParams& params) {
  double beta_max = 0.0;
  for (double r : state.rho.values()) beta_max = std::max(beta_max, params.beta.eval(r).value);
  const double h = state.theta.grid().h;
  return h * h / (2.0 * beta_max + 2.0 * params.mu);
}

std::pair<AngleDensityState, StepDiagnostics> step_explicit_rk4(
    const AngleDensityState& state, const ModelParams& params, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive and finite");
  const double limit = rk4_stability_limit(state, params);
  if (dt > limit)
    throw StabilityViolationError("explicit step dt = " + std::to_string(dt) +
                                  " exceeds the stability bound " + std::to_string(limit));

  const FlowRhs k1 = flow_rhs(state, params);
  const FlowRhs k2 = flow_rhs(axpy_state(state, 0.5 * dt, k1), params);
  const FlowRhs k3 = flow_rhs(axpy_state(state, 0.5 * dt, k2), params);
  const FlowRhs k4 = flow_rhs(axpy_state(state, dt, k3), params);

  AngleDensityState next = state;
  const int n = state.theta.grid().n;
  const double w = dt / 6.0;
  for (int i = 0; i < n; ++i) {
    next.theta[i] = state.theta[i] +
                    w * (k1.dtheta[i] + 2.0 * k2.dtheta[i] + 2.0 * k3.dtheta[i] + k4.dtheta[i]);
    next.rho[i] =
        state.rho[i] + w * (k1.drho[i] + 2.0 * k2.drho[i] + 2.0 * k3.drho[i] + k4.drho[i]);
  }
  next.time = state.time + dt;

  StepDiagnostics d = state_diagnostics(next, params);
  d.dt = dt;
  d.dissipation = dissipation_quotient(state, next, dt);
  return {std::move(next), d};
}

Trajectory run_flow(const AngleDensityState& initial, const ModelParams& params,
                    const FlowConfig& config) {
  params.validate();
  config.validate();

  Trajectory traj;
  AngleDensityState state = initial;

  StepDiagnostics first = state_diagnostics(state, params);
  traj.diagnostics.push_back(first);
  traj.snapshots.push_back(state);

  if (first.grad_norm < config.grad_tol) {
    traj.terminal = Terminal::Stationary;
    return traj;
  }

  const double t_end = initial.time + config.t_end;
  double dt = std::clamp(config.dt_init, config.dt_min, config.dt_max);
  double energy_prev = first.energy;
  long accepted = 0;

  auto step_once = [&](double dt_step) {
    return config.scheme == Scheme::SemiImplicit ? step_semi_implicit(state, params, dt_step)
                                                 : step_explicit_rk4(state, params, dt_step);
  };

  while (true) {
    const double dt_step = std::min(dt, t_end - state.time);

    bool step_ok = true;
    std::pair<AngleDensityState, StepDiagnostics> result;
    try {
      result = step_once(dt_step);
      if (config.project_every > 0 && (accepted + 1) % config.project_every == 0) {
        result.first = project_closure(result.first, params, kProjectTol, kProjectMaxIter);
        result.second = state_diagnostics(result.first, params);
        result.second.dt = dt_step;
        result.second.dissipation = dissipation_quotient(state, result.first, dt_step);
      }
    } catch (const SolverFailureError&) {
      step_ok = false;
    } catch (const StabilityViolationError&) {
      step_ok = false;
    } catch (const NoConvergenceError&) {
      step_ok = false;
    } catch (const DegeneratePiError&) {
      traj.terminal = Terminal::StepFailure;
      return traj;
    }

    const bool energy_ok = step_ok && result.second.energy <= energy_prev + kEnergyIncreaseTol;
    if (!energy_ok) {
      ++traj.rejected_steps;
      if (dt <= config.dt_min * (1.0 + 1e-12)) {
        traj.terminal = Terminal::StepFailure;
        return traj;
      }
      dt = std::max(0.5 * dt, config.dt_min);
      continue;
    }

    ++accepted;
    state = std::move(result.first);
    const StepDiagnostics& diag = result.second;
    traj.diagnostics.push_back(diag);
    if (config.snapshot_every > 0 && accepted % config.snapshot_every == 0)
      traj.snapshots.push_back(state);

    // Relative defect of (E^{n+1} - E^n)/dt + D^n; small values indicate the
    // step resolves the descent identity, so dt may grow.
    const double residual =
        std::abs((diag.energy - energy_prev) / diag.dt + diag.dissipation) /
        (1.0 + diag.dissipation);
    energy_prev = diag.energy;

    if (diag.grad_norm < config.grad_tol) {
      traj.terminal = Terminal::Stationary;
      break;
    }
    if (state.time >= t_end - 1e-12 * std::max(1.0, std::abs(t_end))) {
      traj.terminal = Terminal::ReachedTEnd;
      break;
    }
    if (residual < kGrowResidualGate) dt = std::min(dt * kGrowFactor, config.dt_max);
  }

  if (traj.snapshots.empty() || traj.snapshots.back().time != state.time)
    traj.snapshots.push_back(state);
  return traj;
}

}  // namespace wireflow
