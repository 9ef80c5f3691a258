#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <utility>

#include "test_support.hpp"
#include "wireflow/errors.hpp"
#include "wireflow/flow.hpp"

using namespace wireflow;
using ts::kPi;

TEST_CASE("scheme names round-trip") {
  CHECK(parse_scheme(scheme_name(Scheme::SemiImplicit)) == Scheme::SemiImplicit);
  CHECK(parse_scheme(scheme_name(Scheme::ExplicitRk4)) == Scheme::ExplicitRk4);
  CHECK_THROWS_AS(parse_scheme("midpoint"), ParseError);
  CHECK(terminal_name(Terminal::ReachedTEnd) == "reached_t_end");
  CHECK(terminal_name(Terminal::Stationary) == "stationary");
  CHECK(terminal_name(Terminal::StepFailure) == "step_failure");
}

TEST_CASE("flow configuration validation") {
  FlowConfig c;
  CHECK_NOTHROW(c.validate());
  FlowConfig bad = c;
  bad.dt_init = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.dt_min = 1e-2;
  bad.dt_init = 1e-3;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.t_end = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.grad_tol = -1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.project_every = -1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.snapshot_every = -2;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("state diagnostics mirror the model quantities") {
  ModelParams p = ts::standard_params();
  AngleDensityState st = ts::standard_initial(64);
  st.time = 1.25;
  StepDiagnostics d = state_diagnostics(st, p);
  CHECK(d.time == 1.25);
  CHECK(d.dt == 0.0);
  CHECK(d.dissipation == 0.0);
  CHECK(d.energy == energy(st, p));
  ConstraintValues c = constraint_values(st, p);
  CHECK(d.gcos == c.gcos);
  CHECK(d.gsin == c.gsin);
  CHECK(d.gmass == c.gmass);
  CHECK(d.mean_theta == mean_theta(st));
  FlowRhs r = flow_rhs(st, p);
  CHECK(d.grad_norm == pair_norm(r.dtheta, r.drho));
  CHECK(d.det_pi == r.pi.det);
  CHECK(d.mult.lam_rho == r.mult.lam_rho);
}

TEST_CASE("semi-implicit step damps pure diffusion modes exactly") {
  // Constant stiffness and zero spontaneous curvature decouple the density:
  // one implicit step multiplies the k-th cosine mode by 1/(1 + dt mu sigma_k)
  // with sigma_k the discrete Laplacian symbol.
  const int n = 128;
  const double L = 2.0 * kPi;
  Grid g = make_grid(L, n);
  ModelParams p;
  p.length = L;
  p.mass = L;
  p.mu = 0.7;
  p.c0 = 0.0;
  p.beta = StiffnessProfile::constant(1.0);
  const double dt = 1e-3;
  const double a = 0.25;

  for (int k : {1, 3, 8}) {
    AngleDensityState st = ts::circle_state(g, 1, p.mass);
    st.rho = sample_field(g, [&](double s) { return 1.0 + a * std::cos(k * s); });
    auto [next, diag] = step_semi_implicit(st, p, dt);
    const double sk = 2.0 * std::sin(0.5 * k * g.h) / g.h;
    const double gain = 1.0 / (1.0 + dt * p.mu * sk * sk);
    double worst_rho = 0.0, worst_theta = 0.0;
    for (int i = 0; i < n; ++i) {
      const double want = 1.0 + a * gain * std::cos(k * g.node(i));
      worst_rho = std::max(worst_rho, std::abs(next.rho[i] - want));
      worst_theta = std::max(worst_theta, std::abs(next.theta[i] - st.theta[i]));
    }
    CHECK(worst_rho <= 1e-12);
    CHECK(worst_theta <= 1e-12);
    // Implicit diffusion conserves the discrete mass to solver roundoff.
    CHECK(std::abs(integrate(next.rho) - p.mass) <= 1e-13 * p.mass);
    CHECK(next.time == dt);
    CHECK(diag.dt == dt);
    CHECK(diag.energy <= energy(st, p));
  }
}

TEST_CASE("circle is a fixed point of both steppers") {
  Grid g = make_grid(2.0 * kPi, 256);
  ModelParams p;
  p.length = 2.0 * kPi;
  p.mass = 2.0 * kPi;
  AngleDensityState st = ts::circle_state(g, 1, p.mass);
  auto [semi, dsemi] = step_semi_implicit(st, p, 1e-3);
  CHECK(ts::max_field_diff(semi.theta, st.theta) <= 1e-13);
  CHECK(ts::max_field_diff(semi.rho, st.rho) <= 1e-13);
  auto [rk, drk] = step_explicit_rk4(st, p, 1e-5);
  CHECK(ts::max_field_diff(rk.theta, st.theta) <= 1e-13);
  CHECK(ts::max_field_diff(rk.rho, st.rho) <= 1e-13);
}

TEST_CASE("explicit and semi-implicit steps agree at tiny dt") {
  ModelParams p = ts::standard_params();
  AngleDensityState st = ts::standard_initial(256);
  const double dt = 1e-7;
  auto [semi, d1] = step_semi_implicit(st, p, dt);
  auto [rk, d2] = step_explicit_rk4(st, p, dt);
  Field dth(st.theta.grid()), drh(st.theta.grid());
  for (int i = 0; i < st.theta.size(); ++i) {
    dth[i] = semi.theta[i] - rk.theta[i];
    drh[i] = semi.rho[i] - rk.rho[i];
  }
  CHECK(pair_norm(dth, drh) <= 5e-12);
}

TEST_CASE("explicit step enforces its parabolic stability bound") {
  Grid g = make_grid(2.0 * kPi, 128);
  ModelParams p;
  p.length = 2.0 * kPi;
  p.mass = 2.0 * kPi;
  p.mu = 0.5;
  p.beta = StiffnessProfile::exponential(1.0, 0.5);
  AngleDensityState st = ts::circle_state(g, 1, p.mass);
  st.rho = sample_field(g, [](double s) { return 1.0 + 0.2 * std::cos(s); });
  const double limit = rk4_stability_limit(st, p);
  double beta_max = 0.0;
  for (int i = 0; i < st.rho.size(); ++i)
    beta_max = std::max(beta_max, p.beta(st.rho[i]));
  CHECK(limit == doctest::Approx(g.h * g.h / (2.0 * beta_max + 2.0 * p.mu)).epsilon(1e-14));
  CHECK_THROWS_AS(step_explicit_rk4(st, p, 1.01 * limit), StabilityViolationError);
  CHECK_NOTHROW(step_explicit_rk4(st, p, 0.5 * limit));
}

TEST_CASE("steps reject non-positive dt") {
  ModelParams p = ts::standard_params();
  AngleDensityState st = ts::standard_initial(64);
  CHECK_THROWS_AS(step_semi_implicit(st, p, 0.0), ValidationError);
  CHECK_THROWS_AS(step_explicit_rk4(st, p, -1e-3), ValidationError);
}

TEST_CASE("run_flow stops immediately on a stationary initial state") {
  Grid g = make_grid(2.0 * kPi, 256);
  ModelParams p;
  p.length = 2.0 * kPi;
  p.mass = 2.0 * kPi;
  AngleDensityState st = ts::circle_state(g, 1, p.mass);
  FlowConfig cfg;  // grad_tol 1e-8 default
  Trajectory traj = run_flow(st, p, cfg);
  CHECK(traj.terminal == Terminal::Stationary);
  CHECK(traj.diagnostics.size() == 1);
  CHECK(traj.snapshots.size() == 1);
  CHECK(traj.rejected_steps == 0);
  CHECK(traj.diagnostics.front().grad_norm <= 1e-11);
}

TEST_CASE("run_flow lands exactly on t_end with a fixed step") {
  ModelParams p = ts::standard_params();
  AngleDensityState st = ts::standard_initial(64);
  FlowConfig cfg;
  cfg.dt_init = cfg.dt_min = cfg.dt_max = 1e-3;
  cfg.t_end = 0.01;
  cfg.grad_tol = 0.0;
  Trajectory traj = run_flow(st, p, cfg);
  CHECK(traj.terminal == Terminal::ReachedTEnd);
  CHECK(traj.diagnostics.size() == 11);
  CHECK(traj.diagnostics.back().time == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(traj.rejected_steps == 0);
}

TEST_CASE("run_flow records monotone energies and snapshot cadence") {
  ModelParams p = ts::standard_params();
  AngleDensityState st = ts::standard_initial(64);
  FlowConfig cfg;
  cfg.dt_init = cfg.dt_min = cfg.dt_max = 1e-3;
  cfg.t_end = 0.2;
  cfg.grad_tol = 0.0;
  cfg.snapshot_every = 50;
  Trajectory traj = run_flow(st, p, cfg);
  REQUIRE(traj.diagnostics.size() == 201);
  CHECK(traj.snapshots.size() == 5);  // initial + steps 50/100/150/200
  CHECK(traj.snapshots.front().time == 0.0);
  CHECK(traj.snapshots[1].time == doctest::Approx(0.05).epsilon(1e-12));
  for (size_t i = 1; i < traj.diagnostics.size(); ++i) {
    const StepDiagnostics& prev = traj.diagnostics[i - 1];
    const StepDiagnostics& cur = traj.diagnostics[i];
    CHECK(cur.energy <= prev.energy + 1e-12);
    // The recorded dissipation resolves the descent identity to O(dt).
    const double residual =
        std::abs((cur.energy - prev.energy) / cur.dt + cur.dissipation) / (1.0 + cur.dissipation);
    CHECK(residual <= 0.02);
    CHECK(cur.det_pi > pi_det_floor(p.length));
  }
  CHECK(traj.diagnostics.back().grad_norm < traj.diagnostics.front().grad_norm);
}

TEST_CASE("run_flow grows the step while the descent identity is resolved") {
  ModelParams p = ts::standard_params();
  AngleDensityState st = ts::standard_initial(64);
  FlowConfig cfg;
  cfg.t_end = 0.5;
  cfg.grad_tol = 0.0;
  Trajectory traj = run_flow(st, p, cfg);
  CHECK(traj.terminal == Terminal::ReachedTEnd);
  CHECK(traj.rejected_steps == 0);
  double dt_max_seen = 0.0;
  for (size_t i = 1; i < traj.diagnostics.size(); ++i)
    dt_max_seen = std::max(dt_max_seen, traj.diagnostics[i].dt);
  CHECK(dt_max_seen > 1.5e-3);
  CHECK(dt_max_seen <= cfg.dt_max * (1.0 + 1e-12));
}

TEST_CASE("run_flow reports step failure when the step cannot shrink") {
  ModelParams p = ts::standard_params();
  AngleDensityState st = ts::standard_initial(64);
  FlowConfig cfg;
  cfg.scheme = Scheme::ExplicitRk4;
  // Well above the explicit stability bound, with no room to halve.
  cfg.dt_init = cfg.dt_min = cfg.dt_max = 5e-3;
  cfg.grad_tol = 0.0;
  Trajectory traj = run_flow(st, p, cfg);
  CHECK(traj.terminal == Terminal::StepFailure);
  CHECK(traj.diagnostics.size() == 1);
  CHECK(traj.rejected_steps == 1);
}

TEST_CASE("closure projection inside the loop pins the constraint defects") {
  ModelParams p = ts::standard_params();
  AngleDensityState st = ts::standard_initial(64);
  FlowConfig cfg;
  cfg.dt_init = cfg.dt_min = cfg.dt_max = 1e-3;
  cfg.t_end = 0.5;
  cfg.grad_tol = 0.0;

  cfg.project_every = 1;
  Trajectory with = run_flow(st, p, cfg);
  double worst_on = 0.0;
  for (const StepDiagnostics& d : with.diagnostics)
    worst_on = std::max({worst_on, std::abs(d.gcos), std::abs(d.gsin)});
  CHECK(worst_on <= 1e-12);

  cfg.project_every = 0;
  Trajectory without = run_flow(st, p, cfg);
  double worst_off = 0.0;
  for (const StepDiagnostics& d : without.diagnostics)
    worst_off = std::max({worst_off, std::abs(d.gcos), std::abs(d.gsin)});
  CHECK(worst_off > 1e-10);   // drifts at O(h^2 t) without the projection
  CHECK(worst_off < 1e-2);    // ... but stays small over half a time unit
}
