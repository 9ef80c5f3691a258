#pragma once

#include <string>
#include <vector>

namespace wireflow {

/// Command implementations behind the command-line tool.  They throw
/// wireflow::Error subclasses on configuration and I/O problems; the returned
/// int is the process exit code for conditions that are outcomes rather than
/// usage errors (step failure, refinement failure).

struct RunOptions {
  std::string config_path;
  std::string output_dir;  ///< overrides the config's output_dir when non-empty
  bool refine = false;     ///< Newton-refine the final state if the flow went stationary
};

/// Evolves the configured scenario; writes diagnostics.csv, numbered
/// snapshots, final_state.json, stationary_report.json, and a config echo.
/// Returns 0 on reached_t_end/stationary, 2 on step_failure, 3 when a
/// requested refinement does not converge.
int cmd_run(const RunOptions& opts);

struct RenderOptions {
  std::string snapshot_path;
  std::string output_path;  ///< default: snapshot path with extension .svg
  std::string config_path;  ///< optional; enables the energy caption
};

int cmd_render(const RenderOptions& opts);

struct SweepOptions {
  std::string config_path;
  std::string axis;  ///< one of mu, c0, amplitude
  std::vector<double> values;
  std::string output_dir;  ///< overrides the config's output_dir when non-empty
};

/// Runs one scenario per value (axis "amplitude" scales every initial
/// perturbation amplitude), each in its own case_NNN directory, in parallel up
/// to WIREFLOW_THREADS.  Failures are isolated per case and recorded in
/// summary.csv, which keeps the input order; the sweep itself exits 0 once
/// the summary is complete.
int cmd_sweep(const SweepOptions& opts);

struct OrderStudyOptions {
  std::string config_path;
  std::vector<int> resolutions;
  double t_end = 0.0;        ///< 0 = use flow.t_end from the config
  double dt_coarsest = 0.0;  ///< 0 = use flow.dt_init from the config
  std::string output_path;   ///< default: <output_dir>/order_study.json
};

int cmd_order_study(const OrderStudyOptions& opts);

}  // namespace wireflow
