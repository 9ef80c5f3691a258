#pragma once

#include <string>

#include "wireflow/model.hpp"

namespace wireflow {

/// Deterministic SVG picture of the reconstructed curve.  Segments are
/// colored by the local density (blue at the minimum through red at the
/// maximum; flat blue when the density is uniform), a bar of length L/10
/// fixes the scale, and the caption reports time, winding, resolution, and —
/// only when model parameters are supplied — the energy.
std::string render_curve_svg(const AngleDensityState& state,
                             const ModelParams* params = nullptr);

void write_curve_svg(const std::string& path, const AngleDensityState& state,
                     const ModelParams* params = nullptr);

}  // namespace wireflow
