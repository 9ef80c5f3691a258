#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <set>
#include <string>

#include "test_support.hpp"
#include "wireflow/cli.hpp"
#include "wireflow/errors.hpp"
#include "wireflow/render.hpp"
#include "wireflow/scenario.hpp"
#include "wireflow/snapshot_io.hpp"

using namespace wireflow;
namespace fs = std::filesystem;
using ts::kPi;

namespace {

bool throws_mentioning(const std::string& json_text, const std::string& needle) {
  try {
    parse_scenario(json_text);
  } catch (const Error& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

bool no_temp_files(const fs::path& dir) {
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.path().string().find(".tmp") != std::string::npos) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("empty config object yields the default scenario") {
  ScenarioConfig cfg = parse_scenario("{}");
  CHECK(cfg.n == 256);
  CHECK(cfg.family == "circle");
  CHECK(cfg.output_dir == "out");
  CHECK(cfg.model.length == doctest::Approx(2.0 * kPi).epsilon(1e-15));
  CHECK(cfg.model.mass == cfg.model.length);
  CHECK(cfg.model.mu == 1.0);
  CHECK(cfg.model.c0 == 0.0);
  CHECK(cfg.model.omega == 1);
  CHECK(cfg.model.beta.kind_name() == "constant");
  CHECK(cfg.flow.dt_init == 1e-3);
  CHECK(cfg.flow.t_end == 10.0);
  CHECK(cfg.flow.scheme == Scheme::SemiImplicit);
  CHECK(cfg.flow.project_every == 1);
}

TEST_CASE("configs round-trip through the canonical serialization") {
  const std::string text = R"({
    "model": {"length": 6.0, "mu": 0.5, "c0": 1.0, "omega": 1,
              "beta": {"kind": "gaussian_bump", "base": 1.0, "height": 1.0,
                        "sharpness": 1.0, "center": 0.0}},
    "grid": {"n": 64},
    "flow": {"dt_init": 1e-3, "t_end": 0.5, "scheme": "explicit_rk4", "snapshot_every": 5},
    "initial": {"family": "perturbed_circle",
                 "theta_modes": [{"k": 2, "amplitude": 0.2}],
                 "rho_modes": [{"k": 1, "amplitude": 0.3}]},
    "output_dir": "elsewhere"
  })";
  ScenarioConfig cfg = parse_scenario(text);
  CHECK(cfg.model.mass == 6.0);  // defaults to the length
  CHECK(cfg.flow.scheme == Scheme::ExplicitRk4);
  const std::string canon = scenario_json(cfg);
  ScenarioConfig cfg2 = parse_scenario(canon);
  CHECK(scenario_json(cfg2) == canon);

  ScenarioConfig poly = parse_scenario(
      R"({"model": {"beta": {"kind": "polynomial", "coefficients": [1.0, 0.0, 1.0]}}})");
  CHECK(scenario_json(parse_scenario(scenario_json(poly))) == scenario_json(poly));
}

TEST_CASE("unknown keys are rejected everywhere") {
  CHECK_THROWS_AS(parse_scenario(R"({"bogus": 1})"), ParseError);
  CHECK_THROWS_AS(parse_scenario(R"({"model": {"bogus": 1}})"), ParseError);
  CHECK_THROWS_AS(parse_scenario(R"({"grid": {"m": 64}})"), ParseError);
  CHECK_THROWS_AS(parse_scenario(R"({"flow": {"dt": 1e-3}})"), ParseError);
  CHECK_THROWS_AS(parse_scenario(R"({"initial": {"seed": 2}})"), ParseError);
  CHECK_THROWS_AS(parse_scenario(R"({"model": {"beta": {"kind": "constant", "x": 1}}})"),
                  ParseError);
  CHECK_THROWS_AS(parse_scenario(R"({"model": {"beta": {"kind": "cubic"}}})"), ParseError);
  CHECK_THROWS_AS(parse_scenario(R"({"model": {"beta": {"kind": "polynomial"}}})"), ParseError);
  CHECK_THROWS_AS(parse_scenario(R"({"flow": {"scheme": "midpoint"}})"), ParseError);
  CHECK_THROWS_AS(parse_scenario("not json"), ParseError);
  CHECK_THROWS_AS(parse_scenario("[1, 2]"), ParseError);
}

TEST_CASE("invalid values are rejected with the offending field named") {
  CHECK(throws_mentioning(R"({"model": {"mu": -1.0}})", "mu"));
  CHECK(throws_mentioning(R"({"grid": {"n": 4}})", "grid.n"));
  CHECK(throws_mentioning(R"({"initial": {"family": "spiral"}})", "initial.family"));
  CHECK(throws_mentioning(R"({"model": {"omega": 0}})", "omega != 0"));
  CHECK(throws_mentioning(R"({"initial": {"family": "winding_zero_seed"}})", "omega == 0"));
  CHECK(throws_mentioning(R"({"initial": {"family": "from_snapshot"}})", "initial.path"));
  CHECK(throws_mentioning(
      R"({"initial": {"family": "circle", "theta_modes": [{"k": 1, "amplitude": 0.1}]}})",
      "mode lists"));
  CHECK(throws_mentioning(
      R"({"initial": {"family": "perturbed_circle", "theta_modes": [{"k": 0, "amplitude": 0.1}]}})",
      "k >= 1"));
  CHECK(throws_mentioning(R"({"output_dir": ""})", "output_dir"));
  CHECK(throws_mentioning(R"({"flow": {"t_end": -1.0}})", "t_end"));
}

TEST_CASE("stiffness spellings parse to the right families") {
  ScenarioConfig c = parse_scenario(R"({"model": {"beta": {"kind": "constant", "value": 2.0}}})");
  CHECK(c.model.beta(0.0) == 2.0);
  ScenarioConfig e =
      parse_scenario(R"({"model": {"beta": {"kind": "exponential", "scale": 2.0, "rate": 0.5}}})");
  CHECK(e.model.beta(1.0) == doctest::Approx(2.0 * std::exp(0.5)).epsilon(1e-15));
  ScenarioConfig g = parse_scenario(
      R"({"model": {"beta": {"kind": "gaussian_bump", "base": 1.0, "height": 2.0,
                              "sharpness": 3.0, "center": 0.5}}})");
  CHECK(g.model.beta(0.5) == doctest::Approx(3.0).epsilon(1e-15));
  ScenarioConfig p = parse_scenario(
      R"({"model": {"beta": {"kind": "polynomial", "coefficients": [1.0, 0.0, 1.0]}}})");
  CHECK(p.model.beta(2.0) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("initial families sample onto the constraint set") {
  ScenarioConfig cfg = parse_scenario(R"({"grid": {"n": 64},
    "initial": {"family": "perturbed_circle",
                 "theta_modes": [{"k": 2, "amplitude": 0.2}],
                 "rho_modes": [{"k": 1, "amplitude": 0.3}]}})");
  AngleDensityState st = build_initial_state(cfg);
  CHECK(st.theta.grid().n == 64);
  CHECK(verify_winding(st) == 1);
  ConstraintValues c = constraint_values(st, cfg.model);
  CHECK(std::abs(c.gcos) <= 1e-12);
  CHECK(std::abs(c.gsin) <= 1e-12);
  CHECK(std::abs(c.gmass) <= 1e-12 * (1.0 + std::abs(cfg.model.mass)));

  ScenarioConfig seed = parse_scenario(
      R"({"grid": {"n": 64}, "model": {"omega": 0},
          "initial": {"family": "winding_zero_seed", "amplitude": 0.1}})");
  AngleDensityState sz = build_initial_state(seed);
  CHECK(verify_winding(sz) == 0);
  ConstraintValues cz = constraint_values(sz, seed.model);
  CHECK(std::abs(cz.gcos) <= 1e-12);
  CHECK(std::abs(cz.gsin) <= 1e-12);

  ScenarioConfig phase = parse_scenario(R"({"initial": {"family": "circle", "phase": 0.3}})");
  AngleDensityState sp = build_initial_state(phase);
  CHECK(verify_winding(sp) == 1);
}

TEST_CASE("snapshot files feed back in as initial data") {
  ts::TempDir tmp("wf_snap");
  AngleDensityState st = ts::standard_initial(64);
  st.time = 0.75;
  const std::string path = (tmp.path() / "state.json").string();
  write_state_json(path, st);

  nlohmann::ordered_json cfgj;
  cfgj["grid"]["n"] = 64;
  cfgj["model"]["length"] = 2.0 * kPi;
  cfgj["initial"]["family"] = "from_snapshot";
  cfgj["initial"]["path"] = path;
  ScenarioConfig cfg = parse_scenario(cfgj.dump());
  AngleDensityState back = build_initial_state(cfg);
  CHECK(ts::max_field_diff(back.theta, st.theta) <= 1e-12);
  CHECK(ts::max_field_diff(back.rho, st.rho) <= 1e-12);
  CHECK(back.time == 0.0);  // runs restart their clock

  cfgj["grid"]["n"] = 128;  // grid disagreement is refused
  CHECK_THROWS_AS(build_initial_state(parse_scenario(cfgj.dump())), ValidationError);
  cfgj["grid"]["n"] = 64;
  cfgj["model"]["omega"] = -1;
  cfgj["initial"].erase("path");
  cfgj["initial"]["path"] = path;
  CHECK_THROWS_AS(build_initial_state(parse_scenario(cfgj.dump())), ValidationError);
}

TEST_CASE("state snapshots round-trip bit for bit") {
  AngleDensityState st = ts::standard_initial(96);
  st.time = 1.2345678901234567;
  AngleDensityState back = parse_state_json(state_json(st));
  CHECK(back.time == st.time);
  CHECK(back.omega == st.omega);
  REQUIRE(back.theta.size() == st.theta.size());
  for (int i = 0; i < st.theta.size(); ++i) {
    CHECK(back.theta[i] == st.theta[i]);
    CHECK(back.rho[i] == st.rho[i]);
  }
}

TEST_CASE("snapshot parsing rejects malformed input") {
  AngleDensityState st = ts::standard_initial(64);
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(state_json(st));

  nlohmann::ordered_json extra = j;
  extra["color"] = "red";
  CHECK_THROWS_AS(parse_state_json(extra.dump()), ParseError);

  nlohmann::ordered_json missing = j;
  missing.erase("rho");
  CHECK_THROWS_AS(parse_state_json(missing.dump()), ParseError);

  nlohmann::ordered_json lied = j;
  lied["omega"] = 3;  // recomputed winding will disagree
  CHECK_THROWS_AS(parse_state_json(lied.dump()), ValidationError);

  nlohmann::ordered_json shorter = j;
  shorter["n"] = 32;
  CHECK_THROWS_AS(parse_state_json(shorter.dump()), ValidationError);

  CHECK_THROWS_AS(parse_state_json("[]"), ParseError);
  CHECK_THROWS_AS(load_state_json("/nonexistent/state.json"), IoError);
}

TEST_CASE("diagnostics table has the documented shape") {
  Trajectory traj;
  StepDiagnostics d;
  d.time = 0.0;
  d.dt = 0.0;
  d.energy = 1.5;
  d.mean_theta = 2.0;
  d.grad_norm = 0.25;
  d.det_pi = 9.0;
  traj.diagnostics.push_back(d);
  const std::string csv = diagnostics_csv(traj);
  CHECK(csv ==
        "t,dt,energy,dissipation,lam_theta1,lam_theta2,lam_rho,"
        "gcos,gsin,gmass,mean_theta,grad_norm,det_pi\n"
        "0,0,1.5,0,0,0,0,0,0,0,2,0.25,9\n");

  ts::TempDir tmp("wf_csv");
  const std::string path = (tmp.path() / "diag.csv").string();
  write_diagnostics_csv(path, traj);
  CHECK(read_text_file(path) == csv);
}

TEST_CASE("cmd_run writes the documented artifact set") {
  ts::TempDir tmp("wf_run");
  nlohmann::ordered_json cfgj;
  cfgj["model"]["mu"] = 0.5;
  cfgj["model"]["c0"] = 1.0;
  cfgj["model"]["beta"] = {{"kind", "gaussian_bump"}};
  cfgj["grid"]["n"] = 64;
  cfgj["flow"] = {{"dt_init", 1e-3}, {"dt_min", 1e-3}, {"dt_max", 1e-3},
                  {"t_end", 0.05},   {"grad_tol", 0.0}, {"snapshot_every", 20}};
  cfgj["initial"]["family"] = "perturbed_circle";
  cfgj["initial"]["theta_modes"] = {{{"k", 2}, {"amplitude", 0.2}}};
  cfgj["initial"]["rho_modes"] = {{{"k", 1}, {"amplitude", 0.3}}};
  const std::string cfg_path = (tmp.path() / "config.json").string();
  write_text_atomic(cfg_path, cfgj.dump());

  RunOptions opts;
  opts.config_path = cfg_path;
  opts.output_dir = (tmp.path() / "out").string();
  CHECK(cmd_run(opts) == 0);

  const fs::path out(opts.output_dir);
  CHECK(fs::exists(out / "config.json"));
  CHECK(fs::exists(out / "diagnostics.csv"));
  CHECK(fs::exists(out / "final_state.json"));
  CHECK(fs::exists(out / "stationary_report.json"));
  // initial + steps 20 and 40 + final state at step 50
  CHECK(fs::exists(out / "snapshot_000000.json"));
  CHECK(fs::exists(out / "snapshot_000003.json"));
  CHECK_FALSE(fs::exists(out / "snapshot_000004.json"));
  CHECK(no_temp_files(out));

  // The config echo reparses under the same strict reader.
  CHECK_NOTHROW(load_scenario((out / "config.json").string()));
  AngleDensityState final_state = load_state_json((out / "final_state.json").string());
  CHECK(final_state.time == doctest::Approx(0.05).epsilon(1e-12));
  const std::string csv = read_text_file((out / "diagnostics.csv").string());
  CHECK(csv.rfind("t,dt,energy", 0) == 0);

  nlohmann::ordered_json rep =
      nlohmann::ordered_json::parse(read_text_file((out / "stationary_report.json").string()));
  CHECK(rep.contains("residual_l2"));
  CHECK_FALSE(rep.contains("newton_iterations"));  // no refinement requested
  CHECK(rep["residual_l2"].get<double>() > 1e-8);  // still evolving at t = 0.05
}

TEST_CASE("cmd_run refines a stationary limit on request") {
  ts::TempDir tmp("wf_refine");
  const std::string cfg_path = (tmp.path() / "config.json").string();
  write_text_atomic(cfg_path, R"({"initial": {"family": "circle"}})");
  RunOptions opts;
  opts.config_path = cfg_path;
  opts.output_dir = (tmp.path() / "out").string();
  opts.refine = true;
  CHECK(cmd_run(opts) == 0);
  const fs::path out(opts.output_dir);
  CHECK(fs::exists(out / "refined_state.json"));
  nlohmann::ordered_json rep =
      nlohmann::ordered_json::parse(read_text_file((out / "stationary_report.json").string()));
  REQUIRE(rep.contains("newton_iterations"));
  CHECK(rep["newton_iterations"].get<int>() <= 1);
  CHECK(rep["residual_theta_max"].get<double>() <= 1e-11);
  AngleDensityState refined = load_state_json((out / "refined_state.json").string());
  AngleDensityState circle = ts::circle_state(refined.theta.grid(), 1, 2.0 * kPi);
  CHECK(ts::max_field_diff(refined.theta, circle.theta) <= 1e-12);
}

TEST_CASE("cmd_run reports step failure through its exit code") {
  ts::TempDir tmp("wf_fail");
  const std::string cfg_path = (tmp.path() / "config.json").string();
  // Explicit scheme pinned far above its stability bound with no room to halve.
  write_text_atomic(cfg_path, R"({
    "grid": {"n": 64},
    "model": {"mu": 0.5, "c0": 1.0, "beta": {"kind": "gaussian_bump"}},
    "flow": {"dt_init": 5e-3, "dt_min": 5e-3, "dt_max": 5e-3, "t_end": 1.0,
              "grad_tol": 0.0, "scheme": "explicit_rk4"},
    "initial": {"family": "perturbed_circle", "theta_modes": [{"k": 2, "amplitude": 0.2}]}
  })");
  RunOptions opts;
  opts.config_path = cfg_path;
  opts.output_dir = (tmp.path() / "out").string();
  CHECK(cmd_run(opts) == 2);
  CHECK(fs::exists(fs::path(opts.output_dir) / "diagnostics.csv"));
}

TEST_CASE("cmd_render draws the curve and captions it when asked") {
  ts::TempDir tmp("wf_render");
  Grid g = make_grid(2.0 * kPi, 96);
  AngleDensityState circle = ts::circle_state(g, 1, 2.0 * kPi);
  const std::string snap = (tmp.path() / "circle.json").string();
  write_state_json(snap, circle);

  RenderOptions opts;
  opts.snapshot_path = snap;
  CHECK(cmd_render(opts) == 0);
  const std::string svg_path = (tmp.path() / "circle.svg").string();
  REQUIRE(fs::exists(svg_path));
  const std::string svg = read_text_file(svg_path);
  CHECK(svg.rfind("<svg xmlns", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("omega = 1") != std::string::npos);
  CHECK(svg.find("E = ") == std::string::npos);  // no model, no energy caption

  // Uniform density paints one color; a density wave needs several.
  auto stroke_colors = [](const std::string& text) {
    std::set<std::string> colors;
    size_t pos = 0;
    while ((pos = text.find("stroke=\"#", pos)) != std::string::npos) {
      colors.insert(text.substr(pos + 9, 6));
      pos += 9;
    }
    return colors;
  };
  CHECK(stroke_colors(svg).size() == 1);

  AngleDensityState wave = circle;
  wave.rho = sample_field(g, [](double s) { return 1.0 + 0.3 * std::cos(s); });
  const std::string snap2 = (tmp.path() / "wave.json").string();
  write_state_json(snap2, wave);
  const std::string cfg_path = (tmp.path() / "config.json").string();
  write_text_atomic(cfg_path, R"({"grid": {"n": 96}})");
  RenderOptions opts2;
  opts2.snapshot_path = snap2;
  opts2.output_path = (tmp.path() / "wave.svg").string();
  opts2.config_path = cfg_path;
  CHECK(cmd_render(opts2) == 0);
  const std::string svg2 = read_text_file(opts2.output_path);
  CHECK(stroke_colors(svg2).size() > 4);
  CHECK(svg2.find("E = ") != std::string::npos);
}

TEST_CASE("cmd_sweep summarizes every case in input order") {
  ts::TempDir tmp("wf_sweep");
  const std::string cfg_path = (tmp.path() / "config.json").string();
  write_text_atomic(cfg_path, R"({"grid": {"n": 64}, "initial": {"family": "circle"}})");

  SweepOptions opts;
  opts.config_path = cfg_path;
  opts.axis = "c0";
  opts.values = {0.5, 1.0, 2.0};
  opts.output_dir = (tmp.path() / "sweep").string();
  CHECK(cmd_sweep(opts) == 0);

  const fs::path root(opts.output_dir);
  REQUIRE(fs::exists(root / "summary.csv"));
  const std::string csv = read_text_file((root / "summary.csv").string());
  CHECK(csv.rfind("value,final_energy,steps,terminal,final_grad_norm\n", 0) == 0);

  // One line per value, in order; the circle is stationary for every c0 and
  // the energy (1/2) L beta (1 - c0)^2 is smallest at c0 = 1.
  std::vector<double> values, energies;
  size_t start = csv.find('\n') + 1;
  while (start < csv.size()) {
    const size_t end = csv.find('\n', start);
    const std::string line = csv.substr(start, end - start);
    const size_t c1 = line.find(',');
    const size_t c2 = line.find(',', c1 + 1);
    values.push_back(std::stod(line.substr(0, c1)));
    energies.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
    CHECK(line.find("stationary") != std::string::npos);
    start = end + 1;
  }
  REQUIRE(values.size() == 3);
  CHECK(values == std::vector<double>{0.5, 1.0, 2.0});
  CHECK(energies[1] < energies[0]);
  CHECK(energies[1] < energies[2]);
  for (int i = 0; i < 3; ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "case_%03d", i);
    CHECK(fs::exists(root / name / "final_state.json"));
  }
}

TEST_CASE("cmd_sweep isolates failing cases") {
  ts::TempDir tmp("wf_sweep_fail");
  const std::string cfg_path = (tmp.path() / "config.json").string();
  write_text_atomic(cfg_path, R"({"grid": {"n": 64}, "initial": {"family": "circle"}})");
  SweepOptions opts;
  opts.config_path = cfg_path;
  opts.axis = "mu";
  opts.values = {1.0, -1.0};  // second case is invalid
  opts.output_dir = (tmp.path() / "sweep").string();
  CHECK(cmd_sweep(opts) == 0);
  const fs::path root(opts.output_dir);
  const std::string csv = read_text_file((root / "summary.csv").string());
  CHECK(csv.find("stationary") != std::string::npos);
  CHECK(csv.find("error") != std::string::npos);
  CHECK(fs::exists(root / "case_001" / "error.txt"));
  CHECK_FALSE(fs::exists(root / "case_001" / "final_state.json"));

  SweepOptions bad = opts;
  bad.axis = "length";
  CHECK_THROWS_AS(cmd_sweep(bad), ValidationError);
  bad = opts;
  bad.values = {};
  CHECK_THROWS_AS(cmd_sweep(bad), ValidationError);
}

TEST_CASE("cmd_order_study writes the fitted report") {
  ts::TempDir tmp("wf_order");
  const std::string cfg_path = (tmp.path() / "config.json").string();
  write_text_atomic(cfg_path, R"({
    "model": {"mu": 0.5, "c0": 1.0, "beta": {"kind": "gaussian_bump"}},
    "initial": {"family": "perturbed_circle",
                 "theta_modes": [{"k": 2, "amplitude": 0.2}],
                 "rho_modes": [{"k": 1, "amplitude": 0.3}]}
  })");
  OrderStudyOptions opts;
  opts.config_path = cfg_path;
  opts.resolutions = {32, 64, 128};
  opts.t_end = 0.25;
  opts.dt_coarsest = 4e-3;
  opts.output_path = (tmp.path() / "order_study.json").string();
  CHECK(cmd_order_study(opts) == 0);
  nlohmann::ordered_json rep =
      nlohmann::ordered_json::parse(read_text_file(opts.output_path));
  CHECK(rep["reference_n"].get<int>() == 128);
  CHECK(rep["resolutions"].get<std::vector<int>>() == std::vector<int>{32, 64});
  CHECK_FALSE(rep["below_noise_floor"].get<bool>());
  const double slope = rep["slope"].get<double>();
  CHECK(slope >= 1.7);
  CHECK(slope <= 2.3);
}
