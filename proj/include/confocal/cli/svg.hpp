#pragma once

#include "confocal/common.hpp"

#include <string>
#include <utility>
#include <vector>

namespace confocal::cli {

using Polyline = std::vector<std::pair<double, double>>;

/// Planar projection of a billiard or trajectory onto coordinates (dim_x, dim_y).
struct PlotScene {
  double ax = 1.0;  ///< squared semi-axis along the horizontal coordinate
  double ay = 1.0;  ///< ... and the vertical one
  bool wall_x = false;  ///< mu != 0 on the horizontal coordinate: domain x >= 0
  bool wall_y = false;
  std::vector<double> caustics;  ///< eta of the confocal conics x^2/(ax-eta) + y^2/(ay-eta) = 1
  std::vector<Polyline> paths;
  std::string title;
};

/// Deterministic SVG text (fixed 3-decimal coordinates).
std::string render_svg(const PlotScene& scene, int size = 640);

/// Samples of the confocal conic clipped to the boundary ellipse; hyperbolas
/// come back as one polyline per branch, empty when the conic has no real points.
std::vector<Polyline> confocal_conic(double ax, double ay, double eta, int samples = 400);

}  // namespace confocal::cli
