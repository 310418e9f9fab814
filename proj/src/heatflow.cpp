#include "nodalab/heatflow.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nodalab/error.h"
#include "nodalab/grid.h"
#include "nodalab/nodal_geometry.h"

namespace nodalab {

namespace {

bool same_level(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

SpectralCoefficients::SpectralCoefficients(SpectralBasis b, std::vector<double> coeffs)
    : basis(std::move(b)), c(std::move(coeffs)) {
  if (c.size() != basis.count()) {
    throw Error(ErrorCode::dimension_mismatch, "coefficient count " + std::to_string(c.size()) +
                                                   " does not match basis size " + std::to_string(basis.count()));
  }
}

ScalarField SpectralCoefficients::field(Provenance provenance) const {
  return combination_field(basis, c, provenance);
}

double n_epsilon(const SpectralCoefficients& coeffs, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::invalid_argument, "epsilon must be positive");
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  for (std::size_t j = 0; j < coeffs.c.size(); ++j) {
    if (coeffs.c[j] == 0.0) continue;
    const double lambda = std::sqrt(coeffs.basis.mode(j).eigenvalue);
    terms.push_back(2.0 * std::log(std::abs(coeffs.c[j])) + eps * lambda);
    top = std::max(top, terms.back());
  }
  if (terms.empty()) return -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  return top + std::log(sum);
}

SpectralCoefficients evolve(const SpectralCoefficients& coeffs, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::invalid_argument, "time must be non-negative");
  SpectralCoefficients out = coeffs;
  for (std::size_t j = 0; j < out.c.size(); ++j) out.c[j] *= std::exp(-coeffs.basis.mode(j).eigenvalue * t);
  return out;
}

double leading_eigenvalue(const SpectralCoefficients& coeffs) {
  double scale = 0.0;
  for (double x : coeffs.c) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) throw Error(ErrorCode::zero_data, "initial data is zero");
  double lead = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < coeffs.c.size(); ++j) {
    if (std::abs(coeffs.c[j]) > 1e-12 * scale) lead = std::min(lead, coeffs.basis.mode(j).eigenvalue);
  }
  return lead;
}

SpectralCoefficients first_nonzero_projection(const SpectralCoefficients& coeffs) {
  const double lead = leading_eigenvalue(coeffs);
  SpectralCoefficients out = coeffs;
  for (std::size_t j = 0; j < out.c.size(); ++j) {
    if (!same_level(coeffs.basis.mode(j).eigenvalue, lead)) out.c[j] = 0.0;
  }
  return out;
}

SpectralCoefficients normalized_coefficients(const SpectralCoefficients& coeffs, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorCode::invalid_argument, "theta must lie in [0, 1]");
  if (theta == 1.0) return first_nonzero_projection(coeffs);
  const double lead = leading_eigenvalue(coeffs);
  const double s = std::tan(theta * std::numbers::pi / 2.0);
  SpectralCoefficients out = coeffs;
  for (std::size_t j = 0; j < out.c.size(); ++j) {
    const double eig = coeffs.basis.mode(j).eigenvalue;
    if (same_level(eig, lead)) continue;
    // Modes below the leading level carry only sub-threshold noise.
    out.c[j] = eig < lead ? 0.0 : coeffs.c[j] * std::exp(-(eig - lead) * s);
  }
  return out;
}

ScalarField normalized_family(const SpectralCoefficients& coeffs, double theta) {
  return normalized_coefficients(coeffs, theta).field(Provenance::heat_evolved);
}

std::vector<double> geometric_theta_grid(int count) {
  std::vector<double> out;
  for (int m = 1; m <= count; ++m) out.push_back(1.0 - std::ldexp(1.0, -m));
  return out;
}

double sup_distance(const SpectralCoefficients& a, const SpectralCoefficients& b, int resolution) {
  if (a.c.size() != b.c.size()) throw Error(ErrorCode::dimension_mismatch, "coefficient sizes differ");
  std::vector<double> diff(a.c.size());
  for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = a.c[j] - b.c[j];
  const NodeGrid grid(a.basis.geometry(), resolution);
  double m = 0.0;
  for (int i = 0; i < grid.n1(); ++i) {
    for (int j = 0; j < grid.n2(); ++j) {
      m = std::max(m, std::abs(evaluate_combination(a.basis, diff, grid.node(i, j)).value));
    }
  }
  return m;
}

HeatNodalLimit heat_nodal_limit(const SpectralCoefficients& coeffs, std::span<const double> thetas, int resolution,
                                int max_refine) {
  const SpectralCoefficients psi = first_nonzero_projection(coeffs);
  auto length_of = [&](const SpectralCoefficients& c) {
    return extract_nodal(c.field(Provenance::heat_evolved), resolution, max_refine).total_length();
  };
  HeatNodalLimit out;
  out.limit_length = length_of(psi);
  for (double theta : thetas) {
    const SpectralCoefficients f = normalized_coefficients(coeffs, theta);
    HeatSample s;
    s.theta = theta;
    s.time = theta == 1.0 ? std::numeric_limits<double>::infinity() : std::tan(theta * std::numbers::pi / 2.0);
    s.length = length_of(f);
    s.sup_distance = sup_distance(f, psi, resolution);
    out.samples.push_back(s);
  }
  std::vector<HeatSample> sorted = out.samples;
  std::sort(sorted.begin(), sorted.end(), [](const HeatSample& a, const HeatSample& b) { return a.theta < b.theta; });
  for (std::size_t k = sorted.size() / 2; k < sorted.size(); ++k) {
    out.tail_deviation = std::max(out.tail_deviation, std::abs(sorted[k].length - out.limit_length));
  }
  return out;
}

}  // namespace nodalab
