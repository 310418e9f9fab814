#pragma once

#include <array>
#include <string>

namespace nodalab {

/// Chart coordinates on a model surface. Torus and rectangle use Cartesian
/// (x1, x2); the unit sphere uses (colatitude, longitude).
struct Point {
  double x1 = 0.0;
  double x2 = 0.0;

  bool operator==(const Point&) const = default;
};

/// Chart-coordinate partial derivatives (d/dx1, d/dx2).
struct Vec2 {
  double d1 = 0.0;
  double d2 = 0.0;
};

enum class GeometryKind { flat_torus, dirichlet_rectangle, sphere };

const char* to_string(GeometryKind kind);
GeometryKind geometry_kind_from_string(const std::string& name);

/// One of the explicit two-dimensional model geometries. Lengths and areas
/// are intrinsic (metric), not chart quantities.
class Geometry {
 public:
  static Geometry torus(double period1, double period2);
  /// Axis-aligned rectangle [x0, x0 + side1] x [y0, y0 + side2].
  static Geometry rectangle(double side1, double side2, double x0 = 0.0, double y0 = 0.0);
  static Geometry sphere();

  GeometryKind kind() const { return kind_; }
  double side1() const { return side1_; }
  double side2() const { return side2_; }
  Point origin() const { return origin_; }

  double area() const;

  /// Chart extent along each axis (torus periods, rectangle sides, or
  /// [0, pi] x [0, 2 pi) for the sphere).
  double extent1() const;
  double extent2() const;
  bool periodic1() const;
  bool periodic2() const;

  /// Wraps periodic coordinates into the fundamental domain.
  Point canonical(Point p) const;

  /// Chart displacement from `from` to `to`, using the minimal periodic image.
  Vec2 displacement(Point from, Point to) const;

  /// Geodesic distance (exact on all three models for points within the
  /// injectivity radius of each other on the torus).
  double distance(Point a, Point b) const;

  /// Intrinsic length of the short chart segment between two points.
  double segment_length(Point a, Point b) const;

  /// Metric norm of a chart gradient at `p`.
  double gradient_norm(Point p, Vec2 grad) const;

  /// Largest radius accepted for metric-ball queries.
  double max_ball_radius() const;

  /// Unit-sphere embedding; only meaningful for the sphere.
  static std::array<double, 3> embed(Point p);

  bool operator==(const Geometry&) const = default;

 private:
  Geometry(GeometryKind kind, double side1, double side2, Point origin);

  GeometryKind kind_;
  double side1_;
  double side2_;
  Point origin_;
};

}  // namespace nodalab
