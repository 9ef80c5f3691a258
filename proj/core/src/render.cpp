#include "wireflow/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "wireflow/snapshot_io.hpp"

namespace wireflow {

namespace {

constexpr double kCanvas = 720.0;
constexpr double kMargin = 48.0;
constexpr double kCaptionBand = 56.0;
constexpr int kLowColor[3] = {31, 119, 180};   // blue
constexpr int kHighColor[3] = {214, 39, 40};   // red

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::string color_at(double t) {
  char buf[8];
  const int r = static_cast<int>(std::lround(kLowColor[0] + t * (kHighColor[0] - kLowColor[0])));
  const int g = static_cast<int>(std::lround(kLowColor[1] + t * (kHighColor[1] - kLowColor[1])));
  const int b = static_cast<int>(std::lround(kLowColor[2] + t * (kHighColor[2] - kLowColor[2])));
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string render_curve_svg(const AngleDensityState& state, const ModelParams* params) {
  const CurvePolyline curve = reconstruct_curve(state);
  const int n = state.theta.grid().n;
  const double length = state.theta.grid().length;

  double xmin = curve.points[0][0], xmax = xmin;
  double ymin = curve.points[0][1], ymax = ymin;
  for (const auto& p : curve.points) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  const double pad = 0.05 * span;
  const double scale = (kCanvas - 2.0 * kMargin) / (span + 2.0 * pad);
  const double cx = 0.5 * (xmin + xmax);
  const double cy = 0.5 * (ymin + ymax);
  const auto map_x = [&](double x) { return kCanvas / 2.0 + (x - cx) * scale; };
  const auto map_y = [&](double y) { return kCanvas / 2.0 - (y - cy) * scale; };

  double rmin = state.rho[0], rmax = state.rho[0];
  for (int i = 0; i < n; ++i) {
    rmin = std::min(rmin, state.rho[i]);
    rmax = std::max(rmax, state.rho[i]);
  }
  const double rrange = rmax - rmin;
  const bool flat = !(rrange > 1e-14 * std::max(1.0, std::abs(rmax)));

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", kCanvas) +
         "\" height=\"" + fmt("%.0f", kCanvas + kCaptionBand) + "\" viewBox=\"0 0 " +
         fmt("%.0f", kCanvas) + " " + fmt("%.0f", kCanvas + kCaptionBand) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<g stroke-linecap=\"round\" stroke-width=\"2.5\" fill=\"none\">\n";
  for (int i = 0; i < n; ++i) {
    const double mid_rho = 0.5 * (state.rho[i] + state.rho[(i + 1) % n]);
    const double t = flat ? 0.0 : std::clamp((mid_rho - rmin) / rrange, 0.0, 1.0);
    svg += "<line x1=\"" + fmt("%.3f", map_x(curve.points[i][0])) + "\" y1=\"" +
           fmt("%.3f", map_y(curve.points[i][1])) + "\" x2=\"" +
           fmt("%.3f", map_x(curve.points[i + 1][0])) + "\" y2=\"" +
           fmt("%.3f", map_y(curve.points[i + 1][1])) + "\" stroke=\"" + color_at(t) + "\"/>\n";
  }
  svg += "</g>\n";

  // Scale bar: one tenth of the curve length, bottom left.
  const double bar = length / 10.0 * scale;
  const double bar_y = kCanvas - 18.0;
  svg += "<line x1=\"" + fmt("%.3f", kMargin) + "\" y1=\"" + fmt("%.3f", bar_y) + "\" x2=\"" +
         fmt("%.3f", kMargin + bar) + "\" y2=\"" + fmt("%.3f", bar_y) +
         "\" stroke=\"black\" stroke-width=\"2\"/>\n";
  svg += "<text x=\"" + fmt("%.3f", kMargin) + "\" y=\"" + fmt("%.3f", bar_y - 6.0) +
         "\" font-family=\"monospace\" font-size=\"14\">L/10</text>\n";

  char caption[160];
  if (params != nullptr) {
    std::snprintf(caption, sizeof(caption), "t = %.6g   E = %.9g   omega = %d   n = %d",
                  state.time, energy(state, *params), state.omega, n);
  } else {
    std::snprintf(caption, sizeof(caption), "t = %.6g   omega = %d   n = %d", state.time,
                  state.omega, n);
  }
  svg += "<text x=\"" + fmt("%.3f", kMargin) + "\" y=\"" + fmt("%.3f", kCanvas + 34.0) +
         "\" font-family=\"monospace\" font-size=\"16\">" + caption + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

void write_curve_svg(const std::string& path, const AngleDensityState& state,
                     const ModelParams* params) {
  write_text_atomic(path, render_curve_svg(state, params));
}

}  // namespace wireflow
