#include "wireflow/snapshot_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "wireflow/errors.hpp"

namespace wireflow {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void require_keys(const ordered_json& obj, const std::vector<std::string>& keys,
                  const std::string& what) {
  for (const std::string& k : keys) {
    if (!obj.contains(k)) throw ParseError(what + ": missing key '" + k + "'");
  }
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const std::string& k : keys) known = known || item.key() == k;
    if (!known) throw ParseError(what + ": unknown key '" + item.key() + "'");
  }
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path + "'");
  return ss.str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failure on '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move temporary file onto '" + path + "'");
  }
}

std::string diagnostics_csv(const Trajectory& traj) {
  std::string out =
      "t,dt,energy,dissipation,lam_theta1,lam_theta2,lam_rho,gcos,gsin,gmass,"
      "mean_theta,grad_norm,det_pi\n";
  for (const StepDiagnostics& d : traj.diagnostics) {
    out += fmt_double(d.time);
    out += ',';
    out += fmt_double(d.dt);
    out += ',';
    out += fmt_double(d.energy);
    out += ',';
    out += fmt_double(d.dissipation);
    out += ',';
    out += fmt_double(d.mult.lam_theta1);
    out += ',';
    out += fmt_double(d.mult.lam_theta2);
    out += ',';
    out += fmt_double(d.mult.lam_rho);
    out += ',';
    out += fmt_double(d.gcos);
    out += ',';
    out += fmt_double(d.gsin);
    out += ',';
    out += fmt_double(d.gmass);
    out += ',';
    out += fmt_double(d.mean_theta);
    out += ',';
    out += fmt_double(d.grad_norm);
    out += ',';
    out += fmt_double(d.det_pi);
    out += '\n';
  }
  return out;
}

void write_diagnostics_csv(const std::string& path, const Trajectory& traj) {
  write_text_atomic(path, diagnostics_csv(traj));
}

std::string state_json(const AngleDensityState& state) {
  const Grid& g = state.theta.grid();
  ordered_json j;
  j["t"] = state.time;
  j["L"] = g.length;
  j["omega"] = state.omega;
  j["n"] = g.n;
  j["theta"] = state.theta.values();
  j["rho"] = state.rho.values();
  return j.dump(2) + "\n";
}

void write_state_json(const std::string& path, const AngleDensityState& state) {
  write_text_atomic(path, state_json(state));
}

AngleDensityState parse_state_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("state snapshot: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("state snapshot: top level must be an object");
  require_keys(j, {"t", "L", "omega", "n", "theta", "rho"}, "state snapshot");
  try {
    const double t = j.at("t").get<double>();
    const double length = j.at("L").get<double>();
    const int omega = j.at("omega").get<int>();
    const int n = j.at("n").get<int>();
    const std::vector<double> theta = j.at("theta").get<std::vector<double>>();
    const std::vector<double> rho = j.at("rho").get<std::vector<double>>();
    if (static_cast<int>(theta.size()) != n || static_cast<int>(rho.size()) != n) {
      throw ValidationError("state snapshot: field lengths disagree with n=" + std::to_string(n));
    }
    const Grid grid = make_grid(length, n);
    AngleDensityState state{Field(grid, theta), Field(grid, rho), omega, t};
    verify_winding(state);
    return state;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("state snapshot: ") + e.what());
  }
}

AngleDensityState load_state_json(const std::string& path) {
  try {
    return parse_state_json(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(std::string(e.what()) + " (file '" + path + "')");
  }
}

std::string stationary_report_json(const StationaryReport& report, int newton_iterations) {
  ordered_json j;
  j["residual_theta_max"] = report.residual_theta_max;
  j["residual_rho_max"] = report.residual_rho_max;
  j["residual_l2"] = report.residual_l2;
  j["lam_theta1"] = report.mult.lam_theta1;
  j["lam_theta2"] = report.mult.lam_theta2;
  j["lam_rho"] = report.mult.lam_rho;
  j["energy"] = report.energy;
  if (newton_iterations >= 0) j["newton_iterations"] = newton_iterations;
  return j.dump(2) + "\n";
}

void write_stationary_report_json(const std::string& path, const StationaryReport& report,
                                  int newton_iterations) {
  write_text_atomic(path, stationary_report_json(report, newton_iterations));
}

std::string order_study_json(const OrderStudyReport& report) {
  ordered_json j;
  j["reference_n"] = report.reference_n;
  j["resolutions"] = report.resolutions;
  j["spacings"] = report.spacings;
  j["errors_theta"] = report.errors_theta;
  j["errors_rho"] = report.errors_rho;
  j["errors_combined"] = report.errors_combined;
  j["slope"] = report.slope;
  j["below_noise_floor"] = report.below_noise_floor;
  return j.dump(2) + "\n";
}

void write_order_study_json(const std::string& path, const OrderStudyReport& report) {
  write_text_atomic(path, order_study_json(report));
}

}  // namespace wireflow
