#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nodalab/field.h"
#include "nodalab/geometry.h"

namespace nodalab {

/// One connected polyline of a nodal set. Vertices are in canonical chart
/// coordinates; consecutive vertices are joined by short chart segments
/// (across the seam on periodic axes).
struct NodalComponent {
  std::vector<Point> vertices;
  bool closed = false;
  double length = 0.0;
  /// Whether f changes sign across the component. Set by the extraction
  /// layer that produced it and refined by boundary_mass().
  bool sign_change = true;
};

struct NodalCurveSet {
  Geometry geometry;
  std::vector<NodalComponent> components;
  int resolution = 0;
  /// Deepest dyadic refinement level actually used.
  int refine_depth = 0;
  /// Base cell size of the extraction lattice.
  double grid_spacing = 0.0;
  /// Every vertex satisfies |f| <= vertex_tolerance.
  double vertex_tolerance = 0.0;

  double total_length() const;
  double sign_change_length() const;
};

/// Marching-cells extraction of {f = 0}.
///
/// Two layers are traced on a cell-centred lattice (see NodeGrid):
///   - sign-change curves, from edges whose endpoint signs differ;
///   - touching curves, where f reaches zero without changing sign, found as
///     interior extrema of f along an edge with |f| <= vertex_tolerance.
/// Edge points are located by bracketed root finding to 1e-12 of the edge
/// length. Saddle cells, cells with unpaired touching points, and cells near
/// candidate singular points (small |f| and small |grad f|) are split
/// dyadically up to `max_refine` extra levels. Exact zeros at samples are
/// shifted by +1e-12 * (field scale) before sign classification.
///
/// Throws Error(resolution) for resolution < 8 and Error(zero_field) when f
/// vanishes at every lattice node.
NodalCurveSet extract_nodal(const ScalarField& field, int resolution, int max_refine);

struct MassEstimate {
  double mass = 0.0;
  std::vector<bool> sign_change;
  /// Segments whose offset samples disagreed between offsets and were
  /// resolved at a finer offset.
  std::size_t degenerate_segments = 0;
};

/// Mass of the boundary of {f < 0}: total length of the components across
/// which f changes sign. Each segment is classified by sampling f at
/// +-0.5 h along its normal (h = lattice spacing); a component is
/// sign-changing when that holds for the majority of its length.
MassEstimate boundary_mass(const ScalarField& field, const NodalCurveSet& curves);

struct SingularSetEstimate {
  std::vector<Point> points;
  double eps_f = 0.0;
  double eps_g = 0.0;
};

/// Clustered local minima of S = max(|f| / eps_f, |grad f| / eps_g) with
/// S <= 1. Grid minima are polished by compass search; representatives are
/// kept at mutual distance >= 2 * grid spacing.
SingularSetEstimate singular_points(const ScalarField& field, int resolution, double eps_f, double eps_g);

enum class ComponentFilter { all, sign_changing };

struct ConcentrationProfile {
  std::vector<double> radii;
  std::vector<double> values;
  std::vector<Point> argmax_centers;
};

/// For each radius, the largest curve length inside a metric ball B_r(c)
/// over centres c on a uniform center_grid lattice (centres include the
/// chart origin).
ConcentrationProfile ball_concentration_profile(const NodalCurveSet& curves, std::span<const double> radii,
                                                int center_grid,
                                                ComponentFilter filter = ComponentFilter::all);

/// Length of the part of a polyline inside the metric ball B_r(center).
double length_in_ball(const Geometry& geometry, std::span<const Point> polyline, bool closed, Point center,
                      double r);

/// A finite union of polylines and points.
struct RectifiableSet {
  Geometry geometry;
  std::vector<std::vector<Point>> polylines;
  std::vector<bool> closed;
  std::vector<Point> points;

  static RectifiableSet from_curves(const NodalCurveSet& curves,
                                    ComponentFilter filter = ComponentFilter::all);
  double length() const;
};

/// Area of the r-neighbourhood of `set`, by counting cells of size
/// r / cells_per_radius whose centre lies within distance r, with a linear
/// partial-coverage correction for cells straddling the tube boundary.
/// Throws Error(resolution) when r is too small to resolve.
double tube_volume(const RectifiableSet& set, double r, int cells_per_radius = 16);

/// Area of {sign f != sign g} (zero counted as positive) by cell counting on
/// an AreaGrid, with 8x8 bilinear sub-sampling in cells where either field
/// changes sign. Requires resolution >= 64.
double symmetric_difference_area(const ScalarField& f, const ScalarField& g, int resolution);

}  // namespace nodalab
