#pragma once

#include <string>

#include "wireflow/diagnostics.hpp"
#include "wireflow/flow.hpp"
#include "wireflow/stationary.hpp"

namespace wireflow {

/// Writes content to path atomically (temp file in the same directory, then
/// rename).  Throws IoError on any filesystem failure.
void write_text_atomic(const std::string& path, const std::string& content);

/// Diagnostics table, one row per recorded state, 17-significant-digit
/// values, unix newlines.  Header:
/// t,dt,energy,dissipation,lam_theta1,lam_theta2,lam_rho,gcos,gsin,gmass,mean_theta,grad_norm,det_pi
std::string diagnostics_csv(const Trajectory& traj);
void write_diagnostics_csv(const std::string& path, const Trajectory& traj);

/// State snapshot as JSON with keys t, L, omega, n, theta, rho.
std::string state_json(const AngleDensityState& state);
void write_state_json(const std::string& path, const AngleDensityState& state);

/// Parses a snapshot produced by state_json.  Unknown or missing keys raise
/// ParseError; inconsistent contents raise ValidationError (including a
/// winding recheck against the stored omega).
AngleDensityState parse_state_json(const std::string& text);
AngleDensityState load_state_json(const std::string& path);

std::string stationary_report_json(const StationaryReport& report, int newton_iterations = -1);
void write_stationary_report_json(const std::string& path, const StationaryReport& report,
                                  int newton_iterations = -1);

std::string order_study_json(const OrderStudyReport& report);
void write_order_study_json(const std::string& path, const OrderStudyReport& report);

/// Reads a whole file; throws IoError if unreadable.
std::string read_text_file(const std::string& path);

}  // namespace wireflow
