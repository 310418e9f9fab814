#pragma once

#include <cstddef>
#include <vector>

#include "nodalab/geometry.h"

namespace nodalab {

/// Sampling lattice for contouring. Nodes sit at the centres of an n1 x n2
/// partition of the chart, so no node lies on a chart boundary, a pole, or
/// the lines x = 0, x = period/2 that symmetric fields like to vanish on.
/// Along periodic axes cells wrap around; along the others there are n-1
/// cells between the outermost nodes.
class NodeGrid {
 public:
  /// `resolution` is the number of cells along the longer chart axis.
  NodeGrid(const Geometry& geometry, int resolution);

  const Geometry& geometry() const { return geometry_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  double h1() const { return h1_; }
  double h2() const { return h2_; }
  /// Nominal cell size max(h1, h2).
  double spacing() const;

  int cells1() const;
  int cells2() const;

  /// Node (i, j) in unwrapped chart coordinates; indices may exceed n along
  /// periodic axes.
  Point node(int i, int j) const;
  std::size_t index(int i, int j) const;

 private:
  Geometry geometry_;
  int n1_;
  int n2_;
  double h1_;
  double h2_;
};

/// Cell partition used for area integrals: corners lie on the chart
/// boundary, and each cell carries its exact metric area (latitude bands
/// on the sphere).
class AreaGrid {
 public:
  AreaGrid(const Geometry& geometry, int resolution);

  const Geometry& geometry() const { return geometry_; }
  int cells1() const { return c1_; }
  int cells2() const { return c2_; }
  int corners1() const { return geometry_.periodic1() ? c1_ : c1_ + 1; }
  int corners2() const { return geometry_.periodic2() ? c2_ : c2_ + 1; }
  double h1() const { return h1_; }
  double h2() const { return h2_; }

  Point corner(int i, int j) const;
  std::size_t corner_index(int i, int j) const;
  double cell_area(int i, int j) const;

 private:
  Geometry geometry_;
  int c1_;
  int c2_;
  double h1_;
  double h2_;
};

}  // namespace nodalab
