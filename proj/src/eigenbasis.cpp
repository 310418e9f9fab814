#include "nodalab/eigenbasis.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nodalab/error.h"

namespace nodalab {

namespace {

constexpr double kPi = std::numbers::pi;

// Associated Legendre function P_l^m(x) without the Condon-Shortley phase;
// s = sqrt(1 - x^2) is passed separately so that x = cos(theta) stays exact.
double legendre(int l, int m, double x, double s) {
  if (m < 0 || m > l) return 0.0;
  double pmm = 1.0;
  for (int k = 1; k <= m; ++k) pmm *= (2.0 * k - 1.0) * s;
  if (l == m) return pmm;
  double pm1 = x * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pm1;
  double pll = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = ((2.0 * ll - 1.0) * x * pm1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pm1;
    pm1 = pll;
  }
  return pll;
}

// d/dtheta of P_l^m(cos theta).
double legendre_dtheta(int l, int m, double x, double s) {
  if (m == 0) return -legendre(l, 1, x, s);
  return 0.5 * ((l + m) * (l - m + 1.0) * legendre(l, m - 1, x, s) - legendre(l, m + 1, x, s));
}

double spherical_norm(int l, int m) {
  double ratio = 1.0;  // (l - m)! / (l + m)!
  for (int k = l - m + 1; k <= l + m; ++k) ratio /= k;
  double n = std::sqrt((2.0 * l + 1.0) / (4.0 * kPi) * ratio);
  return m == 0 ? n : n * std::sqrt(2.0);
}

bool same_eigenvalue(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

// Sorts by eigenvalue, merges values equal up to rounding into one level and
// orders each level by `less`.
template <class Less>
void order_modes(std::vector<Mode>& modes, Less less) {
  std::stable_sort(modes.begin(), modes.end(),
                   [](const Mode& a, const Mode& b) { return a.eigenvalue < b.eigenvalue; });
  std::size_t start = 0;
  while (start < modes.size()) {
    std::size_t end = start + 1;
    while (end < modes.size() && same_eigenvalue(modes[start].eigenvalue, modes[end].eigenvalue)) ++end;
    for (std::size_t k = start; k < end; ++k) modes[k].eigenvalue = modes[start].eigenvalue;
    std::stable_sort(modes.begin() + start, modes.begin() + end, less);
    start = end;
  }
}

std::vector<Mode> torus_modes(const Geometry& g, std::size_t count) {
  const double w1 = 2.0 * kPi / g.side1();
  const double w2 = 2.0 * kPi / g.side2();
  auto eig = [&](int m1, int m2) { return (w1 * m1) * (w1 * m1) + (w2 * m2) * (w2 * m2); };
  const double norm = std::sqrt(2.0 / g.area());
  for (int box = 1;; box *= 2) {
    std::vector<Mode> modes;
    modes.push_back({ModeKind::constant, 0, 0, 0.0, 1.0 / std::sqrt(g.area())});
    for (int m1 = 0; m1 <= box; ++m1) {
      for (int m2 = -box; m2 <= box; ++m2) {
        // Representatives of +-(m1, m2): m1 > 0, or m1 == 0 and m2 > 0.
        if (m1 == 0 && m2 <= 0) continue;
        modes.push_back({ModeKind::cosine, m1, m2, eig(m1, m2), norm});
        modes.push_back({ModeKind::sine, m1, m2, eig(m1, m2), norm});
      }
    }
    auto key = [](const Mode& m) { return std::tuple(std::abs(m.i2), m.i2, m.i1, m.kind == ModeKind::sine); };
    order_modes(modes, [&](const Mode& a, const Mode& b) { return key(a) < key(b); });
    // Every mode outside the box has eigenvalue >= min(w1, w2)^2 (box+1)^2.
    const double outside = std::pow(std::min(w1, w2) * (box + 1), 2);
    if (modes.size() >= count && modes[count - 1].eigenvalue < outside * (1.0 - 1e-12)) {
      modes.resize(count);
      return modes;
    }
  }
}

std::vector<Mode> rectangle_modes(const Geometry& g, std::size_t count) {
  const double w1 = kPi / g.side1();
  const double w2 = kPi / g.side2();
  const double norm = 2.0 / std::sqrt(g.area());
  for (int box = 2;; box *= 2) {
    std::vector<Mode> modes;
    for (int m = 1; m <= box; ++m) {
      for (int n = 1; n <= box; ++n) {
        modes.push_back({ModeKind::dirichlet, m, n, (w1 * m) * (w1 * m) + (w2 * n) * (w2 * n), norm});
      }
    }
    order_modes(modes, [](const Mode& a, const Mode& b) { return std::pair(a.i1, a.i2) < std::pair(b.i1, b.i2); });
    const double outside = std::pow(std::min(w1, w2) * (box + 1), 2);
    if (modes.size() >= count && modes[count - 1].eigenvalue < outside * (1.0 - 1e-12)) {
      modes.resize(count);
      return modes;
    }
  }
}

std::vector<Mode> sphere_modes(std::size_t count) {
  std::vector<Mode> modes;
  for (int l = 0; modes.size() < count; ++l) {
    const double eig = l * (l + 1.0);
    modes.push_back({ModeKind::spherical_cos, l, 0, eig, spherical_norm(l, 0)});
    for (int m = 1; m <= l; ++m) {
      modes.push_back({ModeKind::spherical_cos, l, m, eig, spherical_norm(l, m)});
      modes.push_back({ModeKind::spherical_sin, l, m, eig, spherical_norm(l, m)});
    }
  }
  modes.resize(count);
  return modes;
}

}  // namespace

std::string Mode::label() const {
  std::ostringstream out;
  switch (kind) {
    case ModeKind::constant: return "const";
    case ModeKind::cosine: out << "cos(" << i1 << "," << i2 << ")"; break;
    case ModeKind::sine: out << "sin(" << i1 << "," << i2 << ")"; break;
    case ModeKind::dirichlet: out << "sin(" << i1 << "," << i2 << ")"; break;
    case ModeKind::spherical_cos: out << "Y(" << i1 << "," << i2 << ")"; break;
    case ModeKind::spherical_sin: out << "Y(" << i1 << "," << -i2 << ")"; break;
  }
  return out.str();
}

SpectralBasis::SpectralBasis(Geometry geometry, std::vector<Mode> modes)
    : geometry_(geometry), modes_(std::move(modes)) {}

FieldSample SpectralBasis::evaluate_raw_mode(std::size_t j, Point p) const {
  const Mode& m = modes_.at(j);
  switch (m.kind) {
    case ModeKind::constant:
      return {1.0, {}};
    case ModeKind::cosine:
    case ModeKind::sine: {
      const double k1 = 2.0 * kPi * m.i1 / geometry_.side1();
      const double k2 = 2.0 * kPi * m.i2 / geometry_.side2();
      const double phase = k1 * (p.x1 - geometry_.origin().x1) + k2 * (p.x2 - geometry_.origin().x2);
      const double c = std::cos(phase);
      const double s = std::sin(phase);
      if (m.kind == ModeKind::cosine) return {c, {-k1 * s, -k2 * s}};
      return {s, {k1 * c, k2 * c}};
    }
    case ModeKind::dirichlet: {
      const double k1 = kPi * m.i1 / geometry_.side1();
      const double k2 = kPi * m.i2 / geometry_.side2();
      const double u = k1 * (p.x1 - geometry_.origin().x1);
      const double v = k2 * (p.x2 - geometry_.origin().x2);
      const double su = std::sin(u), cu = std::cos(u), sv = std::sin(v), cv = std::cos(v);
      return {su * sv, {k1 * cu * sv, k2 * su * cv}};
    }
    case ModeKind::spherical_cos:
    case ModeKind::spherical_sin: {
      const int l = m.i1;
      const int order = m.i2;
      const double x = std::cos(p.x1);
      const double s = std::sin(p.x1);
      const double plm = legendre(l, order, x, s);
      const double dplm = legendre_dtheta(l, order, x, s);
      const double ca = std::cos(order * p.x2);
      const double sa = std::sin(order * p.x2);
      if (m.kind == ModeKind::spherical_cos) return {plm * ca, {dplm * ca, -order * plm * sa}};
      return {plm * sa, {dplm * sa, order * plm * ca}};
    }
  }
  return {};
}

FieldSample SpectralBasis::evaluate_mode(std::size_t j, Point p) const {
  FieldSample raw = evaluate_raw_mode(j, p);
  const double n = modes_[j].norm;
  return {n * raw.value, {n * raw.gradient.d1, n * raw.gradient.d2}};
}

SpectralBasis SpectralBasis::subset(std::span<const std::size_t> indices) const {
  std::vector<Mode> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(modes_.at(i));
  return SpectralBasis(geometry_, std::move(picked));
}

std::size_t SpectralBasis::index_of(std::string_view label) const {
  for (std::size_t j = 0; j < modes_.size(); ++j) {
    if (modes_[j].label() == label) return j;
  }
  throw Error(ErrorCode::invalid_argument, "basis has no mode labelled '" + std::string(label) + "'");
}

SpectralBasis build_basis(const Geometry& geometry, std::size_t count) {
  if (count == 0) throw Error(ErrorCode::invalid_argument, "basis count must be at least 1");
  if (count > kMaxBasisCount) {
    throw Error(ErrorCode::invalid_argument,
                "basis count " + std::to_string(count) + " exceeds cap " + std::to_string(kMaxBasisCount));
  }
  switch (geometry.kind()) {
    case GeometryKind::flat_torus: return SpectralBasis(geometry, torus_modes(geometry, count));
    case GeometryKind::dirichlet_rectangle: return SpectralBasis(geometry, rectangle_modes(geometry, count));
    case GeometryKind::sphere: return SpectralBasis(geometry, sphere_modes(count));
  }
  throw Error(ErrorCode::unsupported_geometry, "unsupported geometry kind");
}

ProjectiveCoefficients::ProjectiveCoefficients(std::vector<double> theta) : theta_(std::move(theta)) {
  double sum = 0.0;
  for (double t : theta_) sum += t * t;
  auto first = std::find_if(theta_.begin(), theta_.end(), [](double t) { return t != 0.0; });
  if (first == theta_.end() || !std::isfinite(sum)) {
    throw Error(ErrorCode::invalid_argument, "projective coefficients must be finite and not all zero");
  }
  // Already unit up to rounding: leave magnitudes alone so canonicalization is idempotent.
  const double norm = std::abs(sum - 1.0) <= 8.0 * std::numeric_limits<double>::epsilon() ? 1.0 : std::sqrt(sum);
  const double sign = *first > 0.0 ? 1.0 : -1.0;
  for (double& t : theta_) t = (sign * t) / norm;
}

FieldSample evaluate_combination(const SpectralBasis& basis, std::span<const double> theta, Point p) {
  if (theta.size() != basis.count()) {
    throw Error(ErrorCode::dimension_mismatch, "theta has " + std::to_string(theta.size()) +
                                                   " entries, basis has " + std::to_string(basis.count()));
  }
  FieldSample out;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (theta[j] == 0.0) continue;
    const FieldSample m = basis.evaluate_mode(j, p);
    out.value += theta[j] * m.value;
    out.gradient.d1 += theta[j] * m.gradient.d1;
    out.gradient.d2 += theta[j] * m.gradient.d2;
  }
  return out;
}

FieldSample evaluate_combination(const SpectralBasis& basis, const ProjectiveCoefficients& theta, Point p) {
  return evaluate_combination(basis, theta.values(), p);
}

std::vector<double> theta_from_amplitudes(const SpectralBasis& basis, std::span<const double> amplitudes) {
  if (amplitudes.size() != basis.count()) {
    throw Error(ErrorCode::dimension_mismatch, "amplitude count does not match basis count");
  }
  std::vector<double> theta(amplitudes.size());
  for (std::size_t j = 0; j < theta.size(); ++j) theta[j] = amplitudes[j] / basis.mode(j).norm;
  return theta;
}

std::optional<int> vanishing_order_probe(const SpectralBasis& basis, std::span<const double> theta,
                                         Point p, int max_order, double tol) {
  if (max_order < 0 || max_order > 8) throw Error(ErrorCode::invalid_argument, "max_order must be in [0, 8]");
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_argument, "tol must be positive");
  auto f = [&](double a, double b) { return evaluate_combination(basis, theta, {a, b}).value; };
  auto binomial = [](int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
  };
  for (int k = 0; k <= max_order; ++k) {
    const double h = std::pow(tol, 1.0 / (k + 1));
    for (int a1 = 0; a1 <= k; ++a1) {
      const int a2 = k - a1;
      double sum = 0.0;
      for (int i = 0; i <= a1; ++i) {
        for (int j = 0; j <= a2; ++j) {
          const double w = ((i + j) % 2 ? -1.0 : 1.0) * binomial(a1, i) * binomial(a2, j);
          sum += w * f(p.x1 + (0.5 * a1 - i) * h, p.x2 + (0.5 * a2 - j) * h);
        }
      }
      if (std::abs(sum / std::pow(h, k)) > tol) return k;
    }
  }
  return std::nullopt;
}

}  // namespace nodalab
