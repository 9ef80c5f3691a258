#include "wireflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "wireflow/errors.hpp"

namespace wireflow {

namespace {

constexpr double kTailNoiseFloor = 1e-13;
constexpr int kMinTailPoints = 20;
constexpr double kOrderNoiseFloor = 1e-12;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LineFit f;
  if (!(sxx > 0.0)) throw ValidationError("degenerate abscissa in least-squares fit");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

}  // namespace

DissipationAudit dissipation_audit(const Trajectory& traj) {
  if (traj.diagnostics.empty()) throw ValidationError("dissipation_audit: empty trajectory");
  DissipationAudit audit;
  double sum = 0.0;
  for (size_t i = 1; i < traj.diagnostics.size(); ++i) {
    const StepDiagnostics& prev = traj.diagnostics[i - 1];
    const StepDiagnostics& cur = traj.diagnostics[i];
    if (!(cur.dt > 0.0)) continue;
    const double increase = cur.energy - prev.energy;
    audit.max_energy_increase = std::max(audit.max_energy_increase, increase);
    if (increase > 1e-12) audit.energy_monotone = false;
    const double residual = std::abs(increase / cur.dt + cur.dissipation);
    audit.residuals.push_back(residual);
    sum += residual;
    audit.max_residual = std::max(audit.max_residual, residual);
    audit.max_relative_residual =
        std::max(audit.max_relative_residual, residual / (1.0 + cur.dissipation));
  }
  if (!audit.residuals.empty()) sum /= static_cast<double>(audit.residuals.size());
  audit.mean_residual = sum;
  return audit;
}

ConservationAudit conservation_audit(const Trajectory& traj) {
  if (traj.diagnostics.empty()) throw ValidationError("conservation_audit: empty trajectory");
  ConservationAudit audit;
  const double mean0 = traj.diagnostics.front().mean_theta;
  for (const StepDiagnostics& d : traj.diagnostics) {
    audit.max_mean_theta_drift = std::max(audit.max_mean_theta_drift, std::abs(d.mean_theta - mean0));
    audit.max_abs_gcos = std::max(audit.max_abs_gcos, std::abs(d.gcos));
    audit.max_abs_gsin = std::max(audit.max_abs_gsin, std::abs(d.gsin));
    audit.max_abs_gmass = std::max(audit.max_abs_gmass, std::abs(d.gmass));
  }
  if (!traj.snapshots.empty()) {
    const int w0 = traj.snapshots.front().omega;
    for (const AngleDensityState& s : traj.snapshots) {
      try {
        if (verify_winding(s) != w0) {
          audit.winding_constant = false;
          break;
        }
      } catch (const ValidationError&) {
        audit.winding_constant = false;
        break;
      }
    }
  }
  return audit;
}

OrderStudyReport spatial_order_study(
    const std::function<AngleDensityState(const Grid&)>& initial, const ModelParams& params,
    const std::vector<int>& resolutions, double t_end, double dt_coarsest, Scheme scheme) {
  if (resolutions.size() < 3)
    throw ValidationError("spatial_order_study: need at least 3 resolutions, got " +
                          std::to_string(resolutions.size()));
  for (size_t i = 0; i < resolutions.size(); ++i) {
    if (resolutions[i] < 8)
      throw ValidationError("spatial_order_study: resolution " +
                            std::to_string(resolutions[i]) + " below minimum 8");
    if (i > 0 && resolutions[i] <= resolutions[i - 1])
      throw ValidationError("spatial_order_study: resolutions must be strictly increasing");
  }
  const int n_fine = resolutions.back();
  for (size_t i = 0; i + 1 < resolutions.size(); ++i) {
    if (resolutions[i + 1] % resolutions[i] != 0)
      throw ValidationError("spatial_order_study: resolution " + std::to_string(resolutions[i]) +
                            " does not divide the next one " +
                            std::to_string(resolutions[i + 1]));
  }
  if (!(t_end > 0.0) || !(dt_coarsest > 0.0))
    throw ValidationError("spatial_order_study: t_end and dt_coarsest must be positive");

  // Fixed step counts chosen so every run ends exactly at t_end with dt ~ h^2.
  const long steps0 = std::max(1L, std::lround(t_end / dt_coarsest));
  const int n0 = resolutions.front();

  std::vector<AngleDensityState> finals;
  finals.reserve(resolutions.size());
  for (int n : resolutions) {
    const Grid grid = make_grid(params.length, n);
    AngleDensityState state = initial(grid);
    const long ratio = static_cast<long>(n) / n0;
    const long steps = steps0 * ratio * ratio;
    const double dt = t_end / static_cast<double>(steps);
    for (long k = 0; k < steps; ++k) {
      auto stepped = scheme == Scheme::SemiImplicit ? step_semi_implicit(state, params, dt)
                                                    : step_explicit_rk4(state, params, dt);
      state = std::move(stepped.first);
    }
    finals.push_back(std::move(state));
  }

  OrderStudyReport report;
  report.reference_n = n_fine;
  for (size_t r = 0; r + 1 < resolutions.size(); ++r) {
    const int n = resolutions[r];
    // Compare against the next finer run; using one global reference instead
    // would bias the fitted order upward by the reference's own error.
    const AngleDensityState& ref = finals[r + 1];
    const int stride = resolutions[r + 1] / n;
    const Grid& grid = finals[r].theta.grid();
    Field eth(grid), erh(grid);
    for (int j = 0; j < n; ++j) {
      eth[j] = finals[r].theta[j] - ref.theta[j * stride];
      erh[j] = finals[r].rho[j] - ref.rho[j * stride];
    }
    report.resolutions.push_back(n);
    report.spacings.push_back(grid.h);
    report.errors_theta.push_back(l2_norm(eth));
    report.errors_rho.push_back(l2_norm(erh));
    report.errors_combined.push_back(pair_norm(eth, erh));
  }

  double max_err = 0.0;
  for (double e : report.errors_combined) max_err = std::max(max_err, e);
  if (max_err <= kOrderNoiseFloor) {
    report.below_noise_floor = true;
    report.slope = 0.0;
    return report;
  }
  std::vector<double> lx, ly;
  for (size_t i = 0; i < report.errors_combined.size(); ++i) {
    if (report.errors_combined[i] > 0.0) {
      lx.push_back(std::log(report.spacings[i]));
      ly.push_back(std::log(report.errors_combined[i]));
    }
  }
  if (lx.size() < 2) {
    report.below_noise_floor = true;
    report.slope = 0.0;
    return report;
  }
  report.slope = fit_line(lx, ly).slope;
  return report;
}

LojasiewiczProbe lojasiewicz_probe(const Trajectory& traj, double tail_fraction) {
  if (!(tail_fraction > 0.0) || !(tail_fraction < 1.0))
    throw ValidationError("lojasiewicz_probe: tail_fraction must lie in (0, 1)");
  if (traj.terminal != Terminal::Stationary)
    throw ValidationError("lojasiewicz_probe: trajectory did not stop as stationary");
  if (traj.diagnostics.size() < 2)
    throw InsufficientTailError("lojasiewicz_probe: trajectory too short");
  const double e_inf = traj.diagnostics.back().energy;
  const double floor = kTailNoiseFloor * std::max(1.0, std::abs(e_inf));

  std::vector<double> lx, ly;
  for (const StepDiagnostics& d : traj.diagnostics) {
    const double gap = d.energy - e_inf;
    if (gap > floor && d.grad_norm > 0.0) {
      lx.push_back(std::log(d.grad_norm));
      ly.push_back(std::log(gap));
    }
  }
  // Keep the trailing fraction: the points closest to the limit, where the
  // power law is cleanest.
  const size_t keep = static_cast<size_t>(std::ceil(tail_fraction * static_cast<double>(lx.size())));
  if (static_cast<int>(keep) < kMinTailPoints) {
    throw InsufficientTailError("lojasiewicz_probe: only " + std::to_string(keep) +
                                " tail points above the noise floor, need " +
                                std::to_string(kMinTailPoints));
  }
  lx.erase(lx.begin(), lx.end() - static_cast<long>(keep));
  ly.erase(ly.begin(), ly.end() - static_cast<long>(keep));
  const LineFit fit = fit_line(lx, ly);
  LojasiewiczProbe probe;
  probe.slope = fit.slope;
  probe.exponent = fit.slope != 0.0 ? 1.0 - 1.0 / fit.slope : 0.0;
  probe.r_squared = fit.r_squared;
  probe.points_used = static_cast<int>(lx.size());
  probe.energy_limit = e_inf;
  return probe;
}

}  // namespace wireflow
