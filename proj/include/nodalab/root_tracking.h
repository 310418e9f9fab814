#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "nodalab/expression.h"
#include "nodalab/field.h"

namespace nodalab {

using Complex = std::complex<double>;

/// Monic family X^Q + a_{Q-1}(t) X^{Q-1} + ... + a_0(t) over [t0, t1].
/// Coefficients are single-variable expressions in the parameter.
struct PolynomialFamily {
  std::vector<Expression> coefficients;  // a_0 .. a_{Q-1}
  double t0 = 0.0;
  double t1 = 1.0;

  /// Parses each coefficient as an expression in `parameter`.
  static PolynomialFamily from_strings(std::span<const std::string> coefficients, double t0, double t1,
                                       const std::string& parameter = "t");

  int degree() const { return static_cast<int>(coefficients.size()); }
  /// a_0(t) .. a_{Q-1}(t), 1.
  std::vector<double> at(double t) const;
};

/// All Q roots of sum_q a_q X^q with a_Q = 1 (ascending coefficients),
/// sorted lexicographically by (real, imaginary). Eigenvalues of the
/// companion matrix, each polished by Newton steps that are kept only when
/// they reduce the residual. Throws Error(non_monic) when a_Q != 1.
std::vector<Complex> roots_at(std::span<const Complex> coefficients);
std::vector<Complex> roots_at(std::span<const double> coefficients);

/// Coefficients (ascending, monic) of prod_j (X - r_j).
std::vector<Complex> poly_from_roots(std::span<const Complex> roots);

struct RootBranchSet {
  std::vector<double> t;
  /// values[j][i]: branch j at sample t[i].
  std::vector<std::vector<Complex>> values;
  /// base[i]: whether t[i] belongs to the uniform base lattice (as opposed
  /// to an adaptively inserted midpoint).
  std::vector<bool> base;
  /// Samples inserted by the adaptive jump test.
  std::size_t inserted = 0;

  std::size_t branch_count() const { return values.size(); }
  /// Largest |values[j][i+1] - values[j][i]| over all branches.
  double max_jump() const;
};

/// Roots at `samples` uniform parameters, threaded into branches by
/// minimum-cost matching (cost |z - w|^2) between neighbouring samples.
/// Intervals whose matched jump exceeds 10 x the local coefficient
/// variation bound 2 max_q |delta a_q|^(1/(Q-q)) are bisected, up to
/// `max_insert_depth` times.
RootBranchSet continuous_selection(const PolynomialFamily& family, int samples, int max_insert_depth = 20);

enum class Verdict { converged, diverging, inconclusive };
const char* to_string(Verdict v);

struct SobolevEntry {
  std::size_t branch = 0;
  double q = 0.0;
  /// Discrete integral of |branch'|^q, coarsest level first; the finest
  /// level uses the base lattice spacing.
  std::vector<double> integrals;
  /// Aitken extrapolation of the last three levels (finest value if the
  /// sequence is not geometric).
  double extrapolated = 0.0;
  Verdict verdict = Verdict::inconclusive;
};

struct SobolevEstimate {
  std::vector<double> q_grid;
  int levels = 0;
  std::vector<SobolevEntry> entries;  // branch-major, then q

  const SobolevEntry& entry(std::size_t branch, double q) const;
};

/// Default exponents {1, 1.25, 1.5, 2, 2.5, 3, 4}.
std::vector<double> default_q_grid();

/// Forward-difference W^{1,q} seminorm integrals on the base lattice
/// subsampled by 2^k, k = levels-1 .. 0. Verdict: converged when the two
/// finest levels differ by < 5%, diverging when every successive level
/// grows by a factor >= 1.2. Requires levels >= 3 and enough base samples.
SobolevEstimate sobolev_profile(const RootBranchSet& branches, std::span<const double> q_grid, int levels);

struct LocalPolynomialModel {
  PolynomialFamily family;
  /// Coefficient of the top power (the unit divided out), in the parameter.
  Expression unit;
  /// The prepared field f(x, y) and its chart gradient.
  Expression field;
};

/// f(x, y) = c(x) (y^Q + sum a_q(x) y^q) on the window [x0, x1]. Fails with
/// Error(not_in_prepared_form) when f is not polynomial in y, or when the
/// top coefficient vanishes or changes sign on the window.
LocalPolynomialModel local_polynomial_model(const std::string& expression, double x0, double x1);

/// Closed-form field in (x, y) on the planar window [x0,x1] x [y0,y1].
ScalarField planar_field(const Expression& f, double x0, double x1, double y0, double y1);

struct GraphCoverResult {
  bool pass = false;
  double max_distance = 0.0;
  Point worst{};
  std::size_t points_checked = 0;
  double grid_spacing = 0.0;
};

/// Every nodal point of f on its window (polyline vertices and singular
/// points) must lie within `tol` of the graph of the real part of some
/// branch of the family's continuous root selection.
GraphCoverResult graph_cover_check(const ScalarField& f, const PolynomialFamily& family, int resolution, double tol,
                                   int samples = 1025);

}  // namespace nodalab
