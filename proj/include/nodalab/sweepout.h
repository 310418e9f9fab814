#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nodalab/eigenbasis.h"
#include "nodalab/field.h"
#include "nodalab/nodal_geometry.h"

namespace nodalab {

struct WidthEstimate {
  int p = 0;
  /// Boundary mass at the best coefficient vector found.
  double phi_p_lower = 0.0;
  /// Nodal length at the same coefficients.
  double sup_length = 0.0;
  ProjectiveCoefficients argmax{std::vector<double>{1.0}};
  std::size_t evaluations = 0;
  std::uint64_t seed = 0;
};

struct PhiOptions {
  /// Lattice used by the search objective and the final extraction.
  int resolution = 64;
  int max_refine = 2;
  unsigned threads = 1;
  /// Extra starting points (any length <= p + 1; zero-padded).
  std::vector<std::vector<double>> warm_starts;
};

/// Fast search objective: length of the sign-change contour of the
/// piecewise-linear interpolant of f^theta on the node lattice. Equals the
/// boundary mass up to discretisation error for generic theta.
class SweepObjective {
 public:
  SweepObjective(const SpectralBasis& basis, int resolution);

  std::size_t dimension() const { return dim_; }
  double operator()(std::span<const double> theta) const;
  /// Contour length for precomputed node values.
  double contour_length(std::span<const double> node_values) const;
  /// Node values of f^theta.
  std::vector<double> node_values(std::span<const double> theta) const;

 private:
  Geometry geometry_;
  std::size_t dim_;
  int n1_, n2_, c1_, c2_;
  std::vector<Point> nodes_;
  std::vector<double> table_;  // node-major: table_[node * dim_ + j]
};

/// Lower estimate of the p-width of the nodal sweepout spanned by the first
/// p + 1 modes of `basis`. Deterministic for fixed seed, independent of the
/// thread count.
WidthEstimate estimate_phi_p(const SpectralBasis& basis, int p, int restarts, std::uint64_t seed,
                             const PhiOptions& options = {});

struct WeylFit {
  std::vector<double> p_values;
  std::vector<double> sup_values;
  double exponent = 0.0;
  double constant = 0.0;
  /// Root-mean-square residual of the log-log fit.
  double residual = 0.0;
};

struct WeylPoint {
  double p;
  double value;
};

/// Least-squares fit of log(value) = log(constant) + exponent * log(p).
WeylFit weyl_fit(std::span<const WeylPoint> points);

struct NonConcentrationTable {
  std::vector<double> radii;
  std::vector<double> values;
};

struct NonConcentrationOptions {
  int resolution = 96;
  int max_refine = 2;
  int center_grid = 64;
};

/// Sup over random theta (first p + 1 modes) and ball centres of the
/// sign-changing nodal length inside B_r.
NonConcentrationTable sweepout_nonconcentration_check(const SpectralBasis& basis, int p, int theta_samples,
                                                      std::span<const double> radii, std::uint64_t seed,
                                                      const NonConcentrationOptions& options = {});

struct FlatScan {
  /// Proxy for each adjacent pair of the path.
  std::vector<double> steps;
  double max_proxy = 0.0;
};

/// Flat-distance proxy along a path of coefficient vectors. Adjacent
/// boundaries are compared modulo orientation: the proxy is
/// min(D, area - D) with D the symmetric-difference area of the negative
/// sets, since canonical representatives may flip sign along the path.
FlatScan flat_continuity_scan(const SpectralBasis& basis, std::span<const ProjectiveCoefficients> path,
                              int resolution);

struct AlmgrenResult {
  std::vector<double> slab_areas;
  double total_area = 0.0;
  double max_overlap = 0.0;
  /// Area of cells dropped because f0 changes sign inside them.
  double excluded_area = 0.0;
};

/// Covers the complement of {f0 = 0} by the slabs
/// {b_j < f1 / f0 < b_{j+1}}, b_j = -cot(s_j / 2), with b = -inf at s = 0 and
/// b = +inf at s = 2 pi. Each cell is sampled at 4x4 points.
AlmgrenResult almgren_cycle_check(const ScalarField& f0, const ScalarField& f1, std::span<const double> partition,
                                  int resolution);

/// -cot(s / 2) with the limits at 0 and 2 pi.
double almgren_bound(double s);

}  // namespace nodalab
