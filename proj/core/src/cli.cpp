#include "wireflow/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include "wireflow/diagnostics.hpp"
#include "wireflow/errors.hpp"
#include "wireflow/render.hpp"
#include "wireflow/scenario.hpp"
#include "wireflow/snapshot_io.hpp"
#include "wireflow/stationary.hpp"

namespace fs = std::filesystem;

namespace wireflow {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

unsigned sweep_thread_count(size_t cases) {
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("WIREFLOW_THREADS")) {
    char* end = nullptr;
    const unsigned long parsed = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && parsed >= 1) threads = static_cast<unsigned>(parsed);
  }
  return static_cast<unsigned>(std::min<size_t>(threads, cases));
}

void write_run_outputs(const fs::path& dir, const ScenarioConfig& cfg, const Trajectory& traj) {
  fs::create_directories(dir);
  write_text_atomic((dir / "config.json").string(), scenario_json(cfg));
  write_diagnostics_csv((dir / "diagnostics.csv").string(), traj);
  for (size_t i = 0; i < traj.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "snapshot_%06zu.json", i);
    write_state_json((dir / name).string(), traj.snapshots[i]);
  }
  write_state_json((dir / "final_state.json").string(), traj.snapshots.back());
}

}  // namespace

int cmd_run(const RunOptions& opts) {
  ScenarioConfig cfg = load_scenario(opts.config_path);
  if (!opts.output_dir.empty()) cfg.output_dir = opts.output_dir;
  const fs::path dir(cfg.output_dir);

  const AngleDensityState initial = build_initial_state(cfg);
  const Trajectory traj = run_flow(initial, cfg.model, cfg.flow);
  write_run_outputs(dir, cfg, traj);

  const AngleDensityState& final_state = traj.snapshots.back();
  int refine_iterations = -1;
  int rc = traj.terminal == Terminal::StepFailure ? 2 : 0;
  StationaryReport report = stationary_residual(final_state, cfg.model);

  if (opts.refine && traj.terminal == Terminal::Stationary) {
    try {
      const NewtonRefineResult refined = newton_refine(final_state, cfg.model);
      refine_iterations = refined.iterations;
      report = refined.report;
      write_state_json((dir / "refined_state.json").string(), refined.state);
    } catch (const Error& e) {
      std::cerr << "refinement failed: " << e.what() << "\n";
      rc = 3;
    }
  } else if (opts.refine) {
    std::cout << "final state is not stationary (terminal " << terminal_name(traj.terminal)
              << "); skipping refinement\n";
  }
  write_stationary_report_json((dir / "stationary_report.json").string(), report,
                               refine_iterations);

  const StepDiagnostics& last = traj.diagnostics.back();
  std::cout << "terminal=" << terminal_name(traj.terminal)
            << " steps=" << traj.diagnostics.size() - 1 << " rejected=" << traj.rejected_steps
            << " t=" << fmt17(last.time) << " energy=" << fmt17(last.energy)
            << " grad_norm=" << fmt17(last.grad_norm) << "\n";
  std::cout << "outputs in " << dir.string() << "\n";
  return rc;
}

int cmd_render(const RenderOptions& opts) {
  const AngleDensityState state = load_state_json(opts.snapshot_path);
  std::string out = opts.output_path;
  if (out.empty()) out = fs::path(opts.snapshot_path).replace_extension(".svg").string();
  if (!opts.config_path.empty()) {
    const ScenarioConfig cfg = load_scenario(opts.config_path);
    write_curve_svg(out, state, &cfg.model);
  } else {
    write_curve_svg(out, state, nullptr);
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_sweep(const SweepOptions& opts) {
  const ScenarioConfig base = load_scenario(opts.config_path);
  if (opts.axis != "mu" && opts.axis != "c0" && opts.axis != "amplitude")
    throw ValidationError("sweep: unknown axis '" + opts.axis +
                          "' (expected mu, c0, or amplitude)");
  if (opts.values.empty()) throw ValidationError("sweep: no values given");
  for (double v : opts.values) {
    if (!std::isfinite(v)) throw ValidationError("sweep: values must be finite");
  }
  const fs::path root(opts.output_dir.empty() ? base.output_dir : opts.output_dir);
  fs::create_directories(root);

  struct Row {
    double value = 0.0;
    double final_energy = std::nan("");
    long steps = 0;
    std::string terminal = "error";
    double final_grad_norm = std::nan("");
    std::string message;
  };
  std::vector<Row> rows(opts.values.size());

  std::atomic<size_t> cursor{0};
  const auto worker = [&]() {
    for (size_t i = cursor.fetch_add(1); i < opts.values.size(); i = cursor.fetch_add(1)) {
      const double value = opts.values[i];
      Row& row = rows[i];
      row.value = value;
      char name[32];
      std::snprintf(name, sizeof(name), "case_%03zu", i);
      const fs::path dir = root / name;
      try {
        ScenarioConfig cfg = base;
        cfg.output_dir = dir.string();
        if (opts.axis == "mu") {
          cfg.model.mu = value;
        } else if (opts.axis == "c0") {
          cfg.model.c0 = value;
        } else {
          for (ModeAmplitude& m : cfg.theta_modes) m.amplitude *= value;
          for (ModeAmplitude& m : cfg.rho_modes) m.amplitude *= value;
          cfg.seed_amplitude *= value;
        }
        cfg.validate();
        const AngleDensityState initial = build_initial_state(cfg);
        const Trajectory traj = run_flow(initial, cfg.model, cfg.flow);
        write_run_outputs(dir, cfg, traj);
        const StepDiagnostics& last = traj.diagnostics.back();
        row.final_energy = last.energy;
        row.steps = static_cast<long>(traj.diagnostics.size()) - 1;
        row.terminal = terminal_name(traj.terminal);
        row.final_grad_norm = last.grad_norm;
      } catch (const std::exception& e) {
        row.message = e.what();
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (!ec) {
          try {
            write_text_atomic((dir / "error.txt").string(), std::string(e.what()) + "\n");
          } catch (const Error&) {
          }
        }
      }
    }
  };

  const unsigned thread_count = sweep_thread_count(opts.values.size());
  std::vector<std::thread> pool;
  pool.reserve(thread_count);
  for (unsigned t = 0; t < thread_count; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  std::string csv = "value,final_energy,steps,terminal,final_grad_norm\n";
  for (const Row& row : rows) {
    csv += fmt17(row.value);
    csv += ',';
    csv += fmt17(row.final_energy);
    csv += ',';
    csv += std::to_string(row.steps);
    csv += ',';
    csv += row.terminal;
    csv += ',';
    csv += fmt17(row.final_grad_norm);
    csv += '\n';
  }
  write_text_atomic((root / "summary.csv").string(), csv);

  for (const Row& row : rows) {
    std::cout << opts.axis << "=" << fmt17(row.value) << " -> " << row.terminal;
    if (!row.message.empty()) std::cout << " (" << row.message << ")";
    std::cout << "\n";
  }
  std::cout << "summary in " << (root / "summary.csv").string() << "\n";
  return 0;
}

int cmd_order_study(const OrderStudyOptions& opts) {
  const ScenarioConfig cfg = load_scenario(opts.config_path);
  if (cfg.family == "from_snapshot")
    throw ValidationError("order study: family 'from_snapshot' cannot be resampled");
  const double t_end = opts.t_end > 0.0 ? opts.t_end : cfg.flow.t_end;
  const double dt0 = opts.dt_coarsest > 0.0 ? opts.dt_coarsest : cfg.flow.dt_init;

  const OrderStudyReport report = spatial_order_study(
      [&cfg](const Grid& grid) { return initial_state_on_grid(cfg, grid); }, cfg.model,
      opts.resolutions, t_end, dt0, cfg.flow.scheme);

  std::string out = opts.output_path;
  if (out.empty()) out = (fs::path(cfg.output_dir) / "order_study.json").string();
  const fs::path parent = fs::path(out).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  write_order_study_json(out, report);

  for (size_t i = 0; i < report.resolutions.size(); ++i) {
    std::cout << "n=" << report.resolutions[i] << " error=" << fmt17(report.errors_combined[i])
              << "\n";
  }
  if (report.below_noise_floor) {
    std::cout << "errors at roundoff level; no meaningful order estimate\n";
  } else {
    std::cout << "estimated order " << fmt17(report.slope) << " (reference n="
              << report.reference_n << ")\n";
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace wireflow
