#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "wireflow/cli.hpp"
#include "wireflow/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"constrained gradient flow of closed heterogeneous elastic wires"};
  app.require_subcommand(1);

  wireflow::RunOptions run_opts;
  CLI::App* run = app.add_subcommand("run", "evolve a scenario and write its outputs");
  run->add_option("--config", run_opts.config_path, "scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", run_opts.output_dir, "override the output directory");
  run->add_flag("--refine", run_opts.refine,
                "Newton-refine the final state when the flow goes stationary");

  wireflow::RenderOptions render_opts;
  CLI::App* render = app.add_subcommand("render", "draw a stored state as an SVG picture");
  render->add_option("--snapshot", render_opts.snapshot_path, "state JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  render->add_option("-o,--out", render_opts.output_path,
                     "output SVG path (default: snapshot with .svg)");
  render->add_option("--config", render_opts.config_path,
                     "scenario JSON; adds the energy to the caption")
      ->check(CLI::ExistingFile);

  wireflow::SweepOptions sweep_opts;
  CLI::App* sweep = app.add_subcommand("sweep", "run one scenario per value along an axis");
  sweep->add_option("--config", sweep_opts.config_path, "scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--axis", sweep_opts.axis, "mu, c0, or amplitude")->required();
  sweep->add_option("--values", sweep_opts.values, "comma-separated axis values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--out", sweep_opts.output_dir, "override the output directory");

  wireflow::OrderStudyOptions study_opts;
  CLI::App* study =
      app.add_subcommand("order-study", "self-convergence study over nested grids");
  study->add_option("--config", study_opts.config_path, "scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  study->add_option("--resolutions", study_opts.resolutions,
                    "comma-separated grid sizes, ascending, nested")
      ->required()
      ->delimiter(',');
  study->add_option("--t-end", study_opts.t_end, "override the final time");
  study->add_option("--dt", study_opts.dt_coarsest, "fixed step at the coarsest grid");
  study->add_option("-o,--out", study_opts.output_path, "report JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return wireflow::cmd_run(run_opts);
    if (render->parsed()) return wireflow::cmd_render(render_opts);
    if (sweep->parsed()) return wireflow::cmd_sweep(sweep_opts);
    if (study->parsed()) return wireflow::cmd_order_study(study_opts);
  } catch (const wireflow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
