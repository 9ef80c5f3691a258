#include "wireflow/scenario.hpp"

#include <cmath>
#include <set>
#include <string>

#include <json.hpp>

#include "wireflow/errors.hpp"
#include "wireflow/snapshot_io.hpp"

namespace wireflow {

namespace {

using ordered_json = nlohmann::ordered_json;

// First positive zero of the Bessel function J0: with theta = z sin(2 pi s/L)
// both closure integrals vanish exactly, so the zero-winding seed starts on
// the constraint set up to quadrature error.
constexpr double kJ0FirstZero = 2.404825557695773;
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kProjectTol = 1e-12;
constexpr int kProjectMaxIter = 32;

void reject_unknown(const ordered_json& obj, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& item : obj.items()) {
    if (known.find(item.key()) == known.end())
      throw ParseError("config: unknown key '" + item.key() + "' in " + where);
  }
}

double get_number(const ordered_json& obj, const std::string& key, const std::string& where) {
  const ordered_json& v = obj.at(key);
  if (!v.is_number()) throw ParseError("config: " + where + "." + key + " must be a number");
  return v.get<double>();
}

int get_integer(const ordered_json& obj, const std::string& key, const std::string& where) {
  const ordered_json& v = obj.at(key);
  if (!v.is_number_integer())
    throw ParseError("config: " + where + "." + key + " must be an integer");
  return v.get<int>();
}

std::string get_string(const ordered_json& obj, const std::string& key,
                       const std::string& where) {
  const ordered_json& v = obj.at(key);
  if (!v.is_string()) throw ParseError("config: " + where + "." + key + " must be a string");
  return v.get<std::string>();
}

StiffnessProfile parse_beta(const ordered_json& obj) {
  if (!obj.is_object()) throw ParseError("config: model.beta must be an object");
  if (!obj.contains("kind")) throw ParseError("config: model.beta.kind is required");
  const std::string kind = get_string(obj, "kind", "model.beta");
  if (kind == "constant") {
    reject_unknown(obj, {"kind", "value"}, "model.beta");
    return StiffnessProfile::constant(obj.contains("value")
                                          ? get_number(obj, "value", "model.beta")
                                          : 1.0);
  }
  if (kind == "exponential") {
    reject_unknown(obj, {"kind", "scale", "rate"}, "model.beta");
    const double scale = obj.contains("scale") ? get_number(obj, "scale", "model.beta") : 1.0;
    const double rate = obj.contains("rate") ? get_number(obj, "rate", "model.beta") : 1.0;
    return StiffnessProfile::exponential(scale, rate);
  }
  if (kind == "gaussian_bump") {
    reject_unknown(obj, {"kind", "base", "height", "sharpness", "center"}, "model.beta");
    const double base = obj.contains("base") ? get_number(obj, "base", "model.beta") : 1.0;
    const double height = obj.contains("height") ? get_number(obj, "height", "model.beta") : 1.0;
    const double sharp =
        obj.contains("sharpness") ? get_number(obj, "sharpness", "model.beta") : 1.0;
    const double center = obj.contains("center") ? get_number(obj, "center", "model.beta") : 0.0;
    return StiffnessProfile::gaussian_bump(base, height, sharp, center);
  }
  if (kind == "polynomial") {
    reject_unknown(obj, {"kind", "coefficients"}, "model.beta");
    if (!obj.contains("coefficients"))
      throw ParseError("config: model.beta.coefficients is required for polynomial");
    const ordered_json& arr = obj.at("coefficients");
    if (!arr.is_array() || arr.empty())
      throw ParseError("config: model.beta.coefficients must be a non-empty array");
    std::vector<double> coeffs;
    for (const auto& c : arr) {
      if (!c.is_number())
        throw ParseError("config: model.beta.coefficients entries must be numbers");
      coeffs.push_back(c.get<double>());
    }
    return StiffnessProfile::polynomial(std::move(coeffs));
  }
  throw ParseError("config: unknown model.beta.kind '" + kind +
                   "' (expected constant, exponential, gaussian_bump, polynomial)");
}

ordered_json beta_json(const StiffnessProfile& beta) {
  ordered_json j;
  j["kind"] = beta.kind_name();
  const std::vector<double>& p = beta.parameters();
  switch (beta.kind()) {
    case StiffnessProfile::Kind::Constant:
      j["value"] = p[0];
      break;
    case StiffnessProfile::Kind::Exponential:
      j["scale"] = p[0];
      j["rate"] = p[1];
      break;
    case StiffnessProfile::Kind::GaussianBump:
      j["base"] = p[0];
      j["height"] = p[1];
      j["sharpness"] = p[2];
      j["center"] = p[3];
      break;
    case StiffnessProfile::Kind::Polynomial:
      j["coefficients"] = p;
      break;
  }
  return j;
}

std::vector<ModeAmplitude> parse_modes(const ordered_json& arr, const std::string& where) {
  if (!arr.is_array()) throw ParseError("config: " + where + " must be an array");
  std::vector<ModeAmplitude> modes;
  for (const auto& entry : arr) {
    if (!entry.is_object()) throw ParseError("config: " + where + " entries must be objects");
    reject_unknown(entry, {"k", "amplitude"}, where);
    if (!entry.contains("k") || !entry.contains("amplitude"))
      throw ParseError("config: " + where + " entries need keys k and amplitude");
    ModeAmplitude m;
    m.k = get_integer(entry, "k", where);
    m.amplitude = get_number(entry, "amplitude", where);
    modes.push_back(m);
  }
  return modes;
}

}  // namespace

void ScenarioConfig::validate() const {
  model.validate();
  flow.validate();
  if (n < 8) throw ValidationError("config: grid.n must be at least 8");
  if (!std::isfinite(phase)) throw ValidationError("config: initial.phase must be finite");
  if (!std::isfinite(seed_amplitude))
    throw ValidationError("config: initial.amplitude must be finite");
  const bool synthetic_circle = family == "circle" || family == "perturbed_circle";
  if (family != "circle" && family != "perturbed_circle" && family != "winding_zero_seed" &&
      family != "from_snapshot") {
    throw ValidationError("config: unknown initial.family '" + family + "'");
  }
  if (synthetic_circle && model.omega == 0)
    throw ValidationError("config: initial.family '" + family + "' requires omega != 0");
  if (family == "winding_zero_seed" && model.omega != 0)
    throw ValidationError("config: initial.family 'winding_zero_seed' requires omega == 0");
  if (family == "from_snapshot" && snapshot_path.empty())
    throw ValidationError("config: initial.family 'from_snapshot' requires initial.path");
  if (family != "perturbed_circle" && (!theta_modes.empty() || !rho_modes.empty()))
    throw ValidationError("config: initial mode lists only apply to family 'perturbed_circle'");
  for (const ModeAmplitude& m : theta_modes) {
    if (m.k < 1) throw ValidationError("config: initial.theta_modes entries need k >= 1");
    if (!std::isfinite(m.amplitude))
      throw ValidationError("config: initial.theta_modes amplitudes must be finite");
  }
  for (const ModeAmplitude& m : rho_modes) {
    if (m.k < 1) throw ValidationError("config: initial.rho_modes entries need k >= 1");
    if (!std::isfinite(m.amplitude))
      throw ValidationError("config: initial.rho_modes amplitudes must be finite");
  }
  if (output_dir.empty()) throw ValidationError("config: output_dir must be non-empty");
}

ScenarioConfig parse_scenario(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config: top level must be an object");
  reject_unknown(j, {"model", "grid", "flow", "initial", "output_dir"}, "top level");

  ScenarioConfig cfg;
  if (j.contains("model")) {
    const ordered_json& m = j.at("model");
    if (!m.is_object()) throw ParseError("config: model must be an object");
    reject_unknown(m, {"length", "mu", "c0", "omega", "mass", "beta"}, "model");
    if (m.contains("length")) cfg.model.length = get_number(m, "length", "model");
    if (m.contains("mu")) cfg.model.mu = get_number(m, "mu", "model");
    if (m.contains("c0")) cfg.model.c0 = get_number(m, "c0", "model");
    if (m.contains("omega")) cfg.model.omega = get_integer(m, "omega", "model");
    cfg.model.mass = m.contains("mass") ? get_number(m, "mass", "model") : cfg.model.length;
    if (m.contains("beta")) cfg.model.beta = parse_beta(m.at("beta"));
  }
  if (j.contains("grid")) {
    const ordered_json& g = j.at("grid");
    if (!g.is_object()) throw ParseError("config: grid must be an object");
    reject_unknown(g, {"n"}, "grid");
    if (g.contains("n")) cfg.n = get_integer(g, "n", "grid");
  }
  if (j.contains("flow")) {
    const ordered_json& f = j.at("flow");
    if (!f.is_object()) throw ParseError("config: flow must be an object");
    reject_unknown(f,
                   {"dt_init", "dt_min", "dt_max", "t_end", "grad_tol", "project_every", "scheme",
                    "snapshot_every"},
                   "flow");
    if (f.contains("dt_init")) cfg.flow.dt_init = get_number(f, "dt_init", "flow");
    if (f.contains("dt_min")) cfg.flow.dt_min = get_number(f, "dt_min", "flow");
    if (f.contains("dt_max")) cfg.flow.dt_max = get_number(f, "dt_max", "flow");
    if (f.contains("t_end")) cfg.flow.t_end = get_number(f, "t_end", "flow");
    if (f.contains("grad_tol")) cfg.flow.grad_tol = get_number(f, "grad_tol", "flow");
    if (f.contains("project_every"))
      cfg.flow.project_every = get_integer(f, "project_every", "flow");
    if (f.contains("scheme")) cfg.flow.scheme = parse_scheme(get_string(f, "scheme", "flow"));
    if (f.contains("snapshot_every"))
      cfg.flow.snapshot_every = get_integer(f, "snapshot_every", "flow");
  }
  if (j.contains("initial")) {
    const ordered_json& i = j.at("initial");
    if (!i.is_object()) throw ParseError("config: initial must be an object");
    reject_unknown(i, {"family", "phase", "theta_modes", "rho_modes", "amplitude", "path"},
                   "initial");
    if (i.contains("family")) cfg.family = get_string(i, "family", "initial");
    if (i.contains("phase")) cfg.phase = get_number(i, "phase", "initial");
    if (i.contains("theta_modes"))
      cfg.theta_modes = parse_modes(i.at("theta_modes"), "initial.theta_modes");
    if (i.contains("rho_modes"))
      cfg.rho_modes = parse_modes(i.at("rho_modes"), "initial.rho_modes");
    if (i.contains("amplitude")) cfg.seed_amplitude = get_number(i, "amplitude", "initial");
    if (i.contains("path")) cfg.snapshot_path = get_string(i, "path", "initial");
  }
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) throw ParseError("config: output_dir must be a string");
    cfg.output_dir = j.at("output_dir").get<std::string>();
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  try {
    return parse_scenario(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(std::string(e.what()) + " (file '" + path + "')");
  }
}

std::string scenario_json(const ScenarioConfig& config) {
  ordered_json j;
  j["model"]["length"] = config.model.length;
  j["model"]["mu"] = config.model.mu;
  j["model"]["c0"] = config.model.c0;
  j["model"]["omega"] = config.model.omega;
  j["model"]["mass"] = config.model.mass;
  j["model"]["beta"] = beta_json(config.model.beta);
  j["grid"]["n"] = config.n;
  j["flow"]["dt_init"] = config.flow.dt_init;
  j["flow"]["dt_min"] = config.flow.dt_min;
  j["flow"]["dt_max"] = config.flow.dt_max;
  j["flow"]["t_end"] = config.flow.t_end;
  j["flow"]["grad_tol"] = config.flow.grad_tol;
  j["flow"]["project_every"] = config.flow.project_every;
  j["flow"]["scheme"] = scheme_name(config.flow.scheme);
  j["flow"]["snapshot_every"] = config.flow.snapshot_every;
  ordered_json init;
  init["family"] = config.family;
  init["phase"] = config.phase;
  ordered_json tmodes = ordered_json::array();
  for (const ModeAmplitude& m : config.theta_modes)
    tmodes.push_back(ordered_json{{"k", m.k}, {"amplitude", m.amplitude}});
  ordered_json rmodes = ordered_json::array();
  for (const ModeAmplitude& m : config.rho_modes)
    rmodes.push_back(ordered_json{{"k", m.k}, {"amplitude", m.amplitude}});
  init["theta_modes"] = tmodes;
  init["rho_modes"] = rmodes;
  init["amplitude"] = config.seed_amplitude;
  if (!config.snapshot_path.empty()) init["path"] = config.snapshot_path;
  j["initial"] = init;
  j["output_dir"] = config.output_dir;
  return j.dump(2) + "\n";
}

AngleDensityState initial_state_on_grid(const ScenarioConfig& config, const Grid& grid) {
  config.validate();
  if (std::abs(grid.length - config.model.length) >
      1e-12 * std::max(1.0, std::abs(config.model.length))) {
    throw ValidationError("initial state: grid length disagrees with the model length");
  }
  const double l = config.model.length;
  const double rho_bar = config.model.mass / l;
  AngleDensityState state;
  state.omega = config.model.omega;
  state.time = 0.0;

  if (config.family == "from_snapshot") {
    AngleDensityState loaded = load_state_json(config.snapshot_path);
    const Grid& lg = loaded.theta.grid();
    if (lg.n != grid.n)
      throw ValidationError("from_snapshot: stored n=" + std::to_string(lg.n) +
                            " does not match requested n=" + std::to_string(grid.n));
    if (std::abs(lg.length - l) > 1e-12 * std::max(1.0, std::abs(l)))
      throw ValidationError("from_snapshot: stored length does not match the model length");
    if (loaded.omega != config.model.omega)
      throw ValidationError("from_snapshot: stored omega=" + std::to_string(loaded.omega) +
                            " does not match model omega=" +
                            std::to_string(config.model.omega));
    loaded.time = 0.0;
    return project_closure(loaded, config.model, kProjectTol, kProjectMaxIter);
  }

  const double turn = kTwoPi * config.model.omega / l;
  if (config.family == "circle") {
    state.theta = sample_field(grid, [&](double s) { return config.phase + turn * s; });
    state.rho = Field(grid, rho_bar);
  } else if (config.family == "perturbed_circle") {
    state.theta = sample_field(grid, [&](double s) {
      double v = config.phase + turn * s;
      for (const ModeAmplitude& m : config.theta_modes)
        v += m.amplitude * std::sin(kTwoPi * m.k * s / l);
      return v;
    });
    state.rho = sample_field(grid, [&](double s) {
      double v = rho_bar;
      for (const ModeAmplitude& m : config.rho_modes)
        v += m.amplitude * std::cos(kTwoPi * m.k * s / l);
      return v;
    });
  } else {  // winding_zero_seed
    state.theta = sample_field(grid, [&](double s) {
      return config.phase + kJ0FirstZero * std::sin(kTwoPi * s / l) +
             config.seed_amplitude * std::sin(2.0 * kTwoPi * s / l);
    });
    state.rho = Field(grid, rho_bar);
  }
  return project_closure(state, config.model, kProjectTol, kProjectMaxIter);
}

AngleDensityState build_initial_state(const ScenarioConfig& config) {
  return initial_state_on_grid(config, make_grid(config.model.length, config.n));
}

}  // namespace wireflow
