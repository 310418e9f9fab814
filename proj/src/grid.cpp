#include "nodalab/grid.h"

#include <algorithm>
#include <cmath>

#include "nodalab/error.h"
#include "nodalab/field.h"

namespace nodalab {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::eigen_combination: return "eigen-combination";
    case Provenance::heat_evolved: return "heat-evolved";
    case Provenance::closed_form: return "closed-form";
  }
  return "unknown";
}

ScalarField combination_field(const SpectralBasis& basis, std::vector<double> theta, Provenance provenance) {
  if (theta.size() != basis.count()) {
    throw Error(ErrorCode::dimension_mismatch, "theta length does not match basis count");
  }
  // Drop zero modes up front: evaluation cost is proportional to the support.
  std::vector<std::size_t> support;
  std::vector<double> weights;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (theta[j] != 0.0) {
      support.push_back(j);
      weights.push_back(theta[j]);
    }
  }
  SpectralBasis reduced = basis.subset(support);
  return ScalarField(
      basis.geometry(),
      [reduced = std::move(reduced), weights = std::move(weights)](Point p) {
        return evaluate_combination(reduced, weights, p);
      },
      provenance);
}

ScalarField linear_combination(double a, const ScalarField& f, double b, const ScalarField& g) {
  if (!(f.geometry() == g.geometry())) {
    throw Error(ErrorCode::invalid_argument, "fields live on different geometries");
  }
  return ScalarField(
      f.geometry(),
      [a, b, f, g](Point p) {
        const FieldSample u = f(p);
        const FieldSample v = g(p);
        return FieldSample{a * u.value + b * v.value,
                           {a * u.gradient.d1 + b * v.gradient.d1, a * u.gradient.d2 + b * v.gradient.d2}};
      },
      f.provenance());
}

namespace {

std::pair<int, int> cell_counts(const Geometry& g, int resolution) {
  const double h = std::max(g.extent1(), g.extent2()) / resolution;
  const int n1 = std::max(2, static_cast<int>(std::lround(g.extent1() / h)));
  const int n2 = std::max(2, static_cast<int>(std::lround(g.extent2() / h)));
  return {n1, n2};
}

}  // namespace

NodeGrid::NodeGrid(const Geometry& geometry, int resolution) : geometry_(geometry) {
  if (resolution < 2) throw Error(ErrorCode::resolution, "grid resolution must be at least 2");
  std::tie(n1_, n2_) = cell_counts(geometry, resolution);
  h1_ = geometry.extent1() / n1_;
  h2_ = geometry.extent2() / n2_;
}

double NodeGrid::spacing() const { return std::max(h1_, h2_); }
int NodeGrid::cells1() const { return geometry_.periodic1() ? n1_ : n1_ - 1; }
int NodeGrid::cells2() const { return geometry_.periodic2() ? n2_ : n2_ - 1; }

Point NodeGrid::node(int i, int j) const {
  return {geometry_.origin().x1 + (i + 0.5) * h1_, geometry_.origin().x2 + (j + 0.5) * h2_};
}

std::size_t NodeGrid::index(int i, int j) const {
  return static_cast<std::size_t>(i % n1_) * n2_ + static_cast<std::size_t>(j % n2_);
}

AreaGrid::AreaGrid(const Geometry& geometry, int resolution) : geometry_(geometry) {
  if (resolution < 2) throw Error(ErrorCode::resolution, "grid resolution must be at least 2");
  std::tie(c1_, c2_) = cell_counts(geometry, resolution);
  h1_ = geometry.extent1() / c1_;
  h2_ = geometry.extent2() / c2_;
}

Point AreaGrid::corner(int i, int j) const {
  return {geometry_.origin().x1 + i * h1_, geometry_.origin().x2 + j * h2_};
}

std::size_t AreaGrid::corner_index(int i, int j) const {
  const int m1 = corners1();
  const int m2 = corners2();
  return static_cast<std::size_t>(i % m1) * m2 + static_cast<std::size_t>(j % m2);
}

double AreaGrid::cell_area(int i, int /*j*/) const {
  if (geometry_.kind() == GeometryKind::sphere) {
    return (std::cos(i * h1_) - std::cos((i + 1) * h1_)) * h2_;
  }
  return h1_ * h2_;
}

}  // namespace nodalab
