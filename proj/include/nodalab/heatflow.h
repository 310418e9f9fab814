#pragma once

#include <span>
#include <vector>

#include "nodalab/eigenbasis.h"
#include "nodalab/field.h"

namespace nodalab {

/// Finite expansion sum_j c_j phi_j over a basis.
struct SpectralCoefficients {
  SpectralBasis basis;
  std::vector<double> c;

  /// Throws Error(dimension_mismatch) when c and basis sizes differ.
  SpectralCoefficients(SpectralBasis basis, std::vector<double> c);

  ScalarField field(Provenance provenance = Provenance::eigen_combination) const;
};

/// log(sum_j c_j^2 exp(eps * lambda_j)), lambda_j = sqrt(eigenvalue_j).
/// -infinity for all-zero coefficients. Requires eps > 0.
double n_epsilon(const SpectralCoefficients& coeffs, double eps);

/// c_j -> c_j exp(-eigenvalue_j * t). Requires t >= 0.
SpectralCoefficients evolve(const SpectralCoefficients& coeffs, double t);

/// Keeps the whole eigenspace of the smallest eigenvalue that carries a
/// coefficient above 1e-12 * max|c_j|. Throws Error(zero_data) on zero input.
SpectralCoefficients first_nonzero_projection(const SpectralCoefficients& coeffs);

/// Eigenvalue (squared frequency) of first_nonzero_projection.
double leading_eigenvalue(const SpectralCoefficients& coeffs);

/// Coefficients of f^theta = exp(+lead * s) u(., s), s = tan(theta pi / 2),
/// and of the projection itself at theta = 1.
SpectralCoefficients normalized_coefficients(const SpectralCoefficients& coeffs, double theta);

ScalarField normalized_family(const SpectralCoefficients& coeffs, double theta);

/// 1 - 2^-m for m = 1..count.
std::vector<double> geometric_theta_grid(int count);

struct HeatSample {
  double theta = 0.0;
  /// Heat time tan(theta pi / 2); infinity at theta = 1.
  double time = 0.0;
  double length = 0.0;
  /// max |f^theta - psi| over the node lattice.
  double sup_distance = 0.0;
};

struct HeatNodalLimit {
  std::vector<HeatSample> samples;
  double limit_length = 0.0;
  /// max |length - limit_length| over the upper half of the theta grid.
  double tail_deviation = 0.0;
};

HeatNodalLimit heat_nodal_limit(const SpectralCoefficients& coeffs, std::span<const double> thetas, int resolution,
                                int max_refine = 2);

/// Sample estimate of sup |a - b| on the node lattice of the given resolution.
double sup_distance(const SpectralCoefficients& a, const SpectralCoefficients& b, int resolution);

}  // namespace nodalab
