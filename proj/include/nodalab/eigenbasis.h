#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nodalab/geometry.h"

namespace nodalab {

/// Value and chart gradient of a scalar field at one point.
struct FieldSample {
  double value = 0.0;
  Vec2 gradient;
};

enum class ModeKind { constant, cosine, sine, dirichlet, spherical_cos, spherical_sin };

/// One closed-form Laplace eigenfunction.
///
/// Index meaning depends on the geometry:
///   torus      (i1, i2) = integer frequency vector, raw function cos/sin(k1 x1 + k2 x2)
///   rectangle  (i1, i2) = (m, n), raw function sin(m pi x1 / a) sin(n pi x2 / b)
///   sphere     (i1, i2) = (l, |m|), raw function P_l^m(cos x1) cos/sin(m x2)
/// `norm` is the analytic constant that makes norm * raw L2-normalized.
struct Mode {
  ModeKind kind = ModeKind::constant;
  int i1 = 0;
  int i2 = 0;
  double eigenvalue = 0.0;  // lambda^2
  double norm = 1.0;

  /// Stable textual name, e.g. "const", "cos(1,0)", "sin(2,1)", "Y(1,-1)".
  std::string label() const;
};

/// The first `count` eigenpairs of a model geometry in non-decreasing
/// eigenvalue order. Degenerate eigenspaces are ordered deterministically:
///   torus      by (|m2|, m2), then cos before sin
///   rectangle  lexicographic in (m, n)
///   sphere     by |m|, then cos before sin
class SpectralBasis {
 public:
  SpectralBasis(Geometry geometry, std::vector<Mode> modes);

  const Geometry& geometry() const { return geometry_; }
  std::size_t count() const { return modes_.size(); }
  const Mode& mode(std::size_t j) const { return modes_.at(j); }
  std::span<const Mode> modes() const { return modes_; }

  /// Normalized eigenfunction and its exact chart gradient.
  FieldSample evaluate_mode(std::size_t j, Point p) const;

  /// Raw (un-normalized) closed-form function, e.g. cos(x1) rather than cos(x1)/(pi sqrt 2).
  FieldSample evaluate_raw_mode(std::size_t j, Point p) const;

  /// Basis restricted to the listed modes, in the listed order.
  SpectralBasis subset(std::span<const std::size_t> indices) const;

  /// Position of the mode with the given label; throws when absent.
  std::size_t index_of(std::string_view label) const;

 private:
  Geometry geometry_;
  std::vector<Mode> modes_;
};

inline constexpr std::size_t kMaxBasisCount = 2000;

SpectralBasis build_basis(const Geometry& geometry, std::size_t count);

/// A point of RP^p stored as its canonical representative: unit Euclidean
/// norm, first nonzero entry positive.
class ProjectiveCoefficients {
 public:
  explicit ProjectiveCoefficients(std::vector<double> theta);

  std::span<const double> values() const { return theta_; }
  std::size_t size() const { return theta_.size(); }
  double operator[](std::size_t i) const { return theta_[i]; }

  bool operator==(const ProjectiveCoefficients&) const = default;

 private:
  std::vector<double> theta_;
};

/// sum_j theta_j phi_j(point) with its exact gradient. `theta` is used as
/// given (no canonicalization), so this is linear in theta.
FieldSample evaluate_combination(const SpectralBasis& basis, std::span<const double> theta, Point p);
FieldSample evaluate_combination(const SpectralBasis& basis, const ProjectiveCoefficients& theta, Point p);

/// Theta vector reproducing the raw combination sum_j amplitude_j * raw_j,
/// i.e. theta_j = amplitude_j / norm_j.
std::vector<double> theta_from_amplitudes(const SpectralBasis& basis, std::span<const double> amplitudes);

/// Estimated vanishing order: the smallest k <= max_order for which some
/// k-th order central finite-difference partial derivative exceeds `tol` in
/// magnitude, using step h = tol^(1/(k+1)). Returns nullopt when every
/// derivative up to max_order stays below tol.
std::optional<int> vanishing_order_probe(const SpectralBasis& basis, std::span<const double> theta,
                                         Point p, int max_order, double tol);

}  // namespace nodalab
