#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "wireflow/errors.hpp"
#include "wireflow/flow.hpp"
#include "wireflow/stationary.hpp"

using namespace wireflow;
using ts::kPi;

TEST_CASE("stationary residual report matches the flow velocity") {
  ModelParams p = ts::standard_params();
  AngleDensityState st = ts::standard_initial(128);
  StationaryReport rep = stationary_residual(st, p);
  FlowRhs r = flow_rhs(st, p);
  CHECK(rep.residual_theta_max == max_abs(r.dtheta));
  CHECK(rep.residual_rho_max == max_abs(r.drho));
  CHECK(rep.residual_l2 == pair_norm(r.dtheta, r.drho));
  CHECK(rep.energy == energy(st, p));
  CHECK(rep.mult.lam_theta1 == r.mult.lam_theta1);
  // A genuinely evolving state is far from rest.
  CHECK(rep.residual_l2 > 1e-2);
}

TEST_CASE("circles report near-machine stationarity across stiffness families") {
  const double L = 2.0 * kPi;
  Grid g = make_grid(L, 256);
  for (int fam = 0; fam < 3; ++fam) {
    ModelParams p;
    p.length = L;
    p.mass = L;
    p.mu = 0.5;
    p.c0 = fam * 0.5;
    p.beta = fam == 0   ? StiffnessProfile::constant(1.0)
             : fam == 1 ? StiffnessProfile::exponential(1.0, 0.5)
                        : StiffnessProfile::gaussian_bump(1.0, 1.0, 1.0, 0.0);
    AngleDensityState st = ts::circle_state(g, 1, p.mass);
    StationaryReport rep = stationary_residual(st, p);
    CHECK(rep.residual_theta_max <= 1e-11);
    CHECK(rep.residual_rho_max <= 1e-11);
  }
}

TEST_CASE("exponential stiffness balances the flat density through lam_rho") {
  const double L = 2.0 * kPi;
  Grid g = make_grid(L, 256);
  ModelParams p;
  p.length = L;
  p.mass = 0.0;
  p.c0 = 0.0;
  p.beta = StiffnessProfile::exponential(1.0, 1.0);
  AngleDensityState st = ts::circle_state(g, 1, 0.0);
  StationaryReport rep = stationary_residual(st, p);
  CHECK(rep.mult.lam_rho == doctest::Approx(-0.5).epsilon(1e-13));
  CHECK(rep.residual_rho_max <= 1e-12);
}

TEST_CASE("refining an exact circle converges immediately and leaves it alone") {
  const double L = 2.0 * kPi;
  Grid g = make_grid(L, 256);
  ModelParams p;
  p.length = L;
  p.mass = L;
  AngleDensityState st = ts::circle_state(g, 1, p.mass);
  NewtonRefineResult res = newton_refine(st, p);
  CHECK(res.iterations <= 1);
  CHECK(ts::max_field_diff(res.state.theta, st.theta) <= 1e-13);
  CHECK(ts::max_field_diff(res.state.rho, st.rho) <= 1e-13);
  CHECK(res.state.omega == 1);
}

TEST_CASE("refining a flow limit polishes it to the representable floor") {
  ModelParams p = ts::standard_params();
  AngleDensityState st = ts::standard_initial(256);
  FlowConfig cfg;
  cfg.t_end = 60.0;
  cfg.grad_tol = 1e-8;
  Trajectory traj = run_flow(st, p, cfg);
  REQUIRE(traj.terminal == Terminal::Stationary);
  const AngleDensityState& limit = traj.snapshots.back();

  NewtonRefineResult res = newton_refine(limit, p);
  CHECK(res.iterations <= 5);

  // The refined residual sits at the double-precision floor of the stiffest
  // row of the flux stencil, about 2e-12 on this grid; one ulp of theta moves
  // the residual by ~4e-12, so no representable state does better.
  CHECK(res.report.residual_theta_max <= 3e-12);
  CHECK(res.report.residual_rho_max <= 3e-12);

  // Energy is already at its limit value.
  CHECK(std::abs(res.report.energy - energy(limit, p)) <= 1e-10);

  // The KKT multipliers agree with the closed-form projection values.
  Multipliers formula = multipliers(res.state, p);
  CHECK(std::abs(res.mult.lam_theta1 - formula.lam_theta1) <= 1e-9);
  CHECK(std::abs(res.mult.lam_theta2 - formula.lam_theta2) <= 1e-9);
  CHECK(std::abs(res.mult.lam_rho - formula.lam_rho) <= 1e-9);

  // Constraints and gauge survive the refinement.
  ConstraintValues c = constraint_values(res.state, p);
  CHECK(std::abs(c.gcos) <= 1e-12);
  CHECK(std::abs(c.gsin) <= 1e-12);
  CHECK(std::abs(c.gmass) <= 1e-12 * (1.0 + std::abs(p.mass)));
  CHECK(res.state.omega == limit.omega);
  CHECK(std::abs(mean_theta(res.state) - mean_theta(limit)) <=
        1e-9 * (1.0 + std::abs(mean_theta(limit))));
}

TEST_CASE("refinement refuses states far from stationary") {
  ModelParams p = ts::standard_params();
  AngleDensityState st = ts::standard_initial(128);
  CHECK_THROWS_AS(newton_refine(st, p), NoConvergenceError);
}

TEST_CASE("refinement rejects bad controls") {
  const double L = 2.0 * kPi;
  Grid g = make_grid(L, 64);
  ModelParams p;
  p.length = L;
  p.mass = L;
  AngleDensityState st = ts::circle_state(g, 1, p.mass);
  CHECK_THROWS_AS(newton_refine(st, p, -1.0), ValidationError);
  CHECK_THROWS_AS(newton_refine(st, p, 1e-12, 0), ValidationError);
}
