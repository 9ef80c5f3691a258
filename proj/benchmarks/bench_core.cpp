#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "wireflow/flow.hpp"
#include "wireflow/grid.hpp"
#include "wireflow/model.hpp"

using namespace wireflow;

namespace {

constexpr double kTwoPi = 6.283185307179586;

ModelParams bench_params() {
  ModelParams p;
  p.length = kTwoPi;
  p.mass = kTwoPi;
  p.mu = 0.5;
  p.c0 = 1.0;
  p.beta = StiffnessProfile::gaussian_bump(1.0, 1.0, 1.0, 0.0);
  return p;
}

AngleDensityState bench_state(int n) {
  Grid g = make_grid(kTwoPi, n);
  AngleDensityState st;
  st.theta = sample_field(g, [](double s) { return s + 0.2 * std::sin(2.0 * s); });
  st.rho = sample_field(g, [](double s) { return 1.0 + 0.3 * std::cos(s); });
  st.omega = 1;
  return project_closure(st, bench_params());
}

void bm_cyclic_tridiag(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Grid g = make_grid(kTwoPi, n);
  std::vector<double> sub(n, -1.0), diag(n, 2.5), sup(n, -1.0);
  Field rhs = sample_field(g, [](double s) { return std::sin(s) + 0.3 * std::cos(3.0 * s); });
  for (auto _ : state) {
    Field x = solve_cyclic_tridiag(sub, diag, sup, rhs);
    benchmark::DoNotOptimize(x[0]);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_cyclic_tridiag)->Arg(256)->Arg(1024)->Arg(4096);

void bm_flow_rhs(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ModelParams p = bench_params();
  AngleDensityState st = bench_state(n);
  for (auto _ : state) {
    FlowRhs r = flow_rhs(st, p);
    benchmark::DoNotOptimize(r.mult.lam_rho);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_flow_rhs)->Arg(256)->Arg(1024)->Arg(4096);

void bm_semi_implicit_step(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ModelParams p = bench_params();
  AngleDensityState st = bench_state(n);
  for (auto _ : state) {
    auto next = step_semi_implicit(st, p, 1e-3);
    benchmark::DoNotOptimize(next.second.energy);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_semi_implicit_step)->Arg(256)->Arg(1024)->Arg(4096);

void bm_energy_gradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ModelParams p = bench_params();
  AngleDensityState st = bench_state(n);
  for (auto _ : state) {
    EnergyGradient g = gradient(st, p);
    benchmark::DoNotOptimize(g.theta[0]);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_energy_gradient)->Arg(256)->Arg(1024)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
