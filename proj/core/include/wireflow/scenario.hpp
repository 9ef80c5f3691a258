#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wireflow/flow.hpp"
#include "wireflow/model.hpp"

namespace wireflow {

/// Fourier perturbation component: integer mode index and amplitude.
struct ModeAmplitude {
  int k = 1;
  double amplitude = 0.0;
};

/// A full run description.  Every field has a default, so the empty JSON
/// object is a valid config (unit circle, unit stiffness, n = 256).
struct ScenarioConfig {
  ModelParams model;
  int n = 256;
  FlowConfig flow;

  /// Initial families: "circle", "perturbed_circle", "winding_zero_seed",
  /// "from_snapshot".
  std::string family = "circle";
  double phase = 0.0;                     ///< constant angle offset (circle families)
  std::vector<ModeAmplitude> theta_modes; ///< sine perturbations of the angle
  std::vector<ModeAmplitude> rho_modes;   ///< cosine perturbations of the density
  double seed_amplitude = 0.1;            ///< second-mode strength of the zero-winding seed
  std::string snapshot_path;              ///< for from_snapshot

  std::string output_dir = "out";

  void validate() const;
};

/// Parses a strict JSON config: unknown keys anywhere raise ParseError,
/// invalid values raise ValidationError naming the field.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::string& path);

/// Serializes a config back to JSON (all fields explicit).
std::string scenario_json(const ScenarioConfig& config);

/// Samples the configured initial family on an arbitrary grid of the
/// configured length and projects it onto the constraint set.  from_snapshot
/// only supports the grid it was stored on.
AngleDensityState initial_state_on_grid(const ScenarioConfig& config, const Grid& grid);

/// initial_state_on_grid on the configured resolution.
AngleDensityState build_initial_state(const ScenarioConfig& config);

}  // namespace wireflow
