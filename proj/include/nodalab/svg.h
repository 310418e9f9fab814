#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nodalab/nodal_geometry.h"
#include "nodalab/sweepout.h"

namespace nodalab {

struct PlotCurve {
  std::vector<Point> vertices;
  bool closed = false;
  bool sign_change = true;
};

/// One <path> per curve over the chart rectangle; sign-changing curves are
/// solid, touching curves dashed. Seam crossings start a new subpath.
std::string nodal_svg(const Geometry& geometry, std::span<const PlotCurve> curves);
std::string nodal_svg(const NodalCurveSet& curves);

/// Log-log scatter (one <circle> per point) with the fitted power law as a
/// single <line>.
std::string weyl_svg(const WeylFit& fit);

/// SVG documents for the plottable parts of a run report, keyed by file
/// name. Throws Error(invalid_argument) when nothing is plottable.
std::vector<std::pair<std::string, std::string>> render_plots(const nlohmann::ordered_json& report);

}  // namespace nodalab
