#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "nodalab/eigenbasis.h"
#include "nodalab/geometry.h"

namespace nodalab {

enum class Provenance { eigen_combination, heat_evolved, closed_form };

const char* to_string(Provenance p);

/// A smooth scalar function on a model geometry, evaluated together with its
/// chart gradient. Evaluation must be total on the chart and deterministic.
class ScalarField {
 public:
  using Evaluator = std::function<FieldSample(Point)>;

  ScalarField(Geometry geometry, Evaluator evaluator, Provenance provenance)
      : geometry_(geometry), evaluator_(std::move(evaluator)), provenance_(provenance) {}

  const Geometry& geometry() const { return geometry_; }
  Provenance provenance() const { return provenance_; }

  FieldSample operator()(Point p) const { return evaluator_(p); }
  double value(Point p) const { return evaluator_(p).value; }

 private:
  Geometry geometry_;
  Evaluator evaluator_;
  Provenance provenance_;
};

/// f = sum_j theta_j phi_j as a field. The basis and coefficients are copied.
ScalarField combination_field(const SpectralBasis& basis, std::vector<double> theta,
                              Provenance provenance = Provenance::eigen_combination);

/// a * f + b * g pointwise (both fields must share a geometry).
ScalarField linear_combination(double a, const ScalarField& f, double b, const ScalarField& g);

}  // namespace nodalab
