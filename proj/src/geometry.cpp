#include "nodalab/geometry.h"

#include <cmath>
#include <numbers>

#include "nodalab/error.h"

namespace nodalab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::unsupported_geometry: return "unsupported-geometry";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::zero_field: return "zero-field";
    case ErrorCode::resolution: return "resolution";
    case ErrorCode::degenerate_denominator: return "degenerate-denominator";
    case ErrorCode::zero_data: return "zero-data";
    case ErrorCode::non_monic: return "non-monic";
    case ErrorCode::not_in_prepared_form: return "not-in-prepared-form";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::config_error: return "config-error";
  }
  return "unknown";
}

const char* to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::flat_torus: return "flat-torus";
    case GeometryKind::dirichlet_rectangle: return "dirichlet-rectangle";
    case GeometryKind::sphere: return "sphere";
  }
  return "unknown";
}

GeometryKind geometry_kind_from_string(const std::string& name) {
  if (name == "flat-torus") return GeometryKind::flat_torus;
  if (name == "dirichlet-rectangle") return GeometryKind::dirichlet_rectangle;
  if (name == "sphere") return GeometryKind::sphere;
  throw Error(ErrorCode::unsupported_geometry, "unknown geometry kind '" + name + "'");
}

namespace {

constexpr double kPi = std::numbers::pi;

double wrap(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  if (r >= period) r -= period;
  return r;
}

double minimal_image(double d, double period) {
  return d - period * std::round(d / period);
}

}  // namespace

Geometry::Geometry(GeometryKind kind, double side1, double side2, Point origin)
    : kind_(kind), side1_(side1), side2_(side2), origin_(origin) {
  if (!(side1 > 0.0) || !(side2 > 0.0) || !std::isfinite(side1) || !std::isfinite(side2)) {
    throw Error(ErrorCode::invalid_argument, "geometry lengths must be positive and finite");
  }
}

Geometry Geometry::torus(double period1, double period2) {
  return Geometry(GeometryKind::flat_torus, period1, period2, {});
}

Geometry Geometry::rectangle(double side1, double side2, double x0, double y0) {
  return Geometry(GeometryKind::dirichlet_rectangle, side1, side2, {x0, y0});
}

Geometry Geometry::sphere() { return Geometry(GeometryKind::sphere, kPi, 2.0 * kPi, {}); }

double Geometry::area() const {
  return kind_ == GeometryKind::sphere ? 4.0 * kPi : side1_ * side2_;
}

double Geometry::extent1() const { return side1_; }
double Geometry::extent2() const { return side2_; }

bool Geometry::periodic1() const { return kind_ == GeometryKind::flat_torus; }
bool Geometry::periodic2() const { return kind_ != GeometryKind::dirichlet_rectangle; }

Point Geometry::canonical(Point p) const {
  if (periodic1()) p.x1 = wrap(p.x1 - origin_.x1, side1_) + origin_.x1;
  if (periodic2()) p.x2 = wrap(p.x2 - origin_.x2, side2_) + origin_.x2;
  return p;
}

Vec2 Geometry::displacement(Point from, Point to) const {
  Vec2 d{to.x1 - from.x1, to.x2 - from.x2};
  if (periodic1()) d.d1 = minimal_image(d.d1, side1_);
  if (periodic2()) d.d2 = minimal_image(d.d2, side2_);
  return d;
}

std::array<double, 3> Geometry::embed(Point p) {
  const double s = std::sin(p.x1);
  return {s * std::cos(p.x2), s * std::sin(p.x2), std::cos(p.x1)};
}

double Geometry::distance(Point a, Point b) const {
  if (kind_ == GeometryKind::sphere) {
    const auto u = embed(a);
    const auto v = embed(b);
    const double cx = u[1] * v[2] - u[2] * v[1];
    const double cy = u[2] * v[0] - u[0] * v[2];
    const double cz = u[0] * v[1] - u[1] * v[0];
    const double dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
  }
  const Vec2 d = displacement(a, b);
  return std::hypot(d.d1, d.d2);
}

double Geometry::segment_length(Point a, Point b) const { return distance(a, b); }

double Geometry::gradient_norm(Point p, Vec2 grad) const {
  if (kind_ == GeometryKind::sphere) {
    const double s = std::sin(p.x1);
    if (s < 1e-12) return std::abs(grad.d1);
    return std::hypot(grad.d1, grad.d2 / s);
  }
  return std::hypot(grad.d1, grad.d2);
}

double Geometry::max_ball_radius() const {
  if (kind_ == GeometryKind::sphere) return kPi / 2.0;
  return 0.5 * std::min(side1_, side2_);
}

}  // namespace nodalab
