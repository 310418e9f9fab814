#include "nodalab/root_tracking.h"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "nodalab/assignment.h"
#include "nodalab/error.h"
#include "nodalab/grid.h"
#include "nodalab/nodal_geometry.h"

namespace nodalab {

namespace {

bool lex_less(const Complex& a, const Complex& b) {
  return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
}

Complex horner(std::span<const Complex> a, Complex z) {
  Complex v = 0.0;
  for (std::size_t k = a.size(); k-- > 0;) v = v * z + a[k];
  return v;
}

Complex horner_derivative(std::span<const Complex> a, Complex z) {
  Complex v = 0.0;
  for (std::size_t k = a.size(); k-- > 1;) v = v * z + static_cast<double>(k) * a[k];
  return v;
}

}  // namespace

PolynomialFamily PolynomialFamily::from_strings(std::span<const std::string> coefficients, double t0, double t1,
                                                const std::string& parameter) {
  if (coefficients.empty()) throw Error(ErrorCode::invalid_argument, "a polynomial family needs degree >= 1");
  if (!(t1 > t0)) throw Error(ErrorCode::invalid_argument, "family interval must have t1 > t0");
  PolynomialFamily f;
  f.t0 = t0;
  f.t1 = t1;
  for (const auto& c : coefficients) f.coefficients.push_back(Expression::parse(c, {parameter}));
  return f;
}

std::vector<double> PolynomialFamily::at(double t) const {
  std::vector<double> out;
  out.reserve(coefficients.size() + 1);
  for (const auto& c : coefficients) {
    // The parameter is the first variable; other variables do not occur.
    std::vector<double> vars(c.variables().size(), 0.0);
    if (!vars.empty()) vars[0] = t;
    out.push_back(c.evaluate(vars));
    if (!std::isfinite(out.back())) {
      throw Error(ErrorCode::invalid_argument, "coefficient " + c.to_string() + " is not finite at t = " +
                                                   std::to_string(t));
    }
  }
  out.push_back(1.0);
  return out;
}

std::vector<Complex> roots_at(std::span<const Complex> a) {
  if (a.size() < 2) throw Error(ErrorCode::invalid_argument, "polynomial degree must be at least 1");
  if (std::abs(a.back() - Complex(1.0)) > 1e-12) {
    throw Error(ErrorCode::non_monic, "leading coefficient must be 1");
  }
  const std::size_t q = a.size() - 1;
  std::vector<Complex> roots(q);
  if (q == 1) {
    roots[0] = -a[0];
    return roots;
  }
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(q, q);
  for (std::size_t k = 1; k < q; ++k) companion(k, k - 1) = 1.0;
  for (std::size_t k = 0; k < q; ++k) companion(k, q - 1) = -a[k];
  const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  for (std::size_t k = 0; k < q; ++k) roots[k] = solver.eigenvalues()[static_cast<Eigen::Index>(k)];
  // Newton polishing of isolated roots only: moving members of a cluster
  // one at a time destroys the backward stability of the eigenvalues.
  std::vector<Complex> polished = roots;
  for (std::size_t k = 0; k < q; ++k) {
    Complex z = roots[k];
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < q; ++j) {
      if (j != k) gap = std::min(gap, std::abs(roots[j] - z));
    }
    if (gap <= 1e-3 * std::max(1.0, std::abs(z))) continue;
    double res = std::abs(horner(a, z));
    for (int it = 0; it < 3 && res > 0.0; ++it) {
      const Complex d = horner_derivative(a, z);
      if (d == Complex(0.0)) break;
      const Complex next = z - horner(a, z) / d;
      const double next_res = std::abs(horner(a, next));
      if (!(next_res < res)) break;
      z = next;
      res = next_res;
    }
    polished[k] = z;
  }
  roots = std::move(polished);
  std::sort(roots.begin(), roots.end(), lex_less);
  return roots;
}

std::vector<Complex> roots_at(std::span<const double> a) {
  std::vector<Complex> c(a.begin(), a.end());
  return roots_at(std::span<const Complex>(c));
}

std::vector<Complex> poly_from_roots(std::span<const Complex> roots) {
  std::vector<Complex> p{1.0};
  for (const Complex& r : roots) {
    std::vector<Complex> next(p.size() + 1, 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
      next[k + 1] += p[k];
      next[k] -= r * p[k];
    }
    p = std::move(next);
  }
  return p;
}

double RootBranchSet::max_jump() const {
  double m = 0.0;
  for (const auto& b : values) {
    for (std::size_t i = 1; i < b.size(); ++i) m = std::max(m, std::abs(b[i] - b[i - 1]));
  }
  return m;
}

RootBranchSet continuous_selection(const PolynomialFamily& family, int samples, int max_insert_depth) {
  if (samples < 2) throw Error(ErrorCode::invalid_argument, "continuous_selection needs at least 2 samples");
  const std::size_t q = static_cast<std::size_t>(family.degree());
  RootBranchSet out;
  out.values.assign(q, {});
  constexpr std::size_t kMaxInserted = 1u << 20;

  auto append = [&](double t, const std::vector<Complex>& ordered, bool base) {
    out.t.push_back(t);
    out.base.push_back(base);
    for (std::size_t j = 0; j < q; ++j) out.values[j].push_back(ordered[j]);
  };
  auto bound = [&](const std::vector<double>& al, const std::vector<double>& ar) {
    double b = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
      b = std::max(b, std::pow(std::abs(ar[k] - al[k]), 1.0 / static_cast<double>(q - k)));
    }
    return 2.0 * b;
  };
  auto match = [&](const std::vector<Complex>& prev, const std::vector<Complex>& next) {
    std::vector<double> cost(q * q);
    for (std::size_t i = 0; i < q; ++i) {
      for (std::size_t j = 0; j < q; ++j) cost[i * q + j] = std::norm(prev[i] - next[j]);
    }
    const auto perm = min_cost_assignment(cost, q);
    std::vector<Complex> ordered(q);
    double jump = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      ordered[i] = next[perm[i]];
      jump = std::max(jump, std::abs(ordered[i] - prev[i]));
    }
    return std::pair(ordered, jump);
  };

  // Threads the right end of [tl, tr] onto the current branch values,
  // bisecting while the matched jump is out of proportion to the
  // coefficient change.
  auto thread = [&](auto&& self, double tl, const std::vector<double>& al, const std::vector<Complex>& rl, double tr,
                    const std::vector<double>& ar, const std::vector<Complex>& rr, int depth) -> std::vector<Complex> {
    auto [ordered, jump] = match(rl, rr);
    double scale = 1.0;
    for (const auto& z : rr) scale = std::max(scale, std::abs(z));
    const bool too_far = jump > 10.0 * bound(al, ar) + 1e-12 * scale;
    if (too_far && depth < max_insert_depth && out.inserted < kMaxInserted) {
      const double tm = 0.5 * (tl + tr);
      const std::vector<double> am = family.at(tm);
      const auto rm = roots_at(std::span<const double>(am));
      const std::vector<Complex> mid = self(self, tl, al, rl, tm, am, rm, depth + 1);
      append(tm, mid, false);
      ++out.inserted;
      return self(self, tm, am, mid, tr, ar, rr, depth + 1);
    }
    return ordered;
  };

  const double h = (family.t1 - family.t0) / (samples - 1);
  double tl = family.t0;
  std::vector<double> al = family.at(tl);
  std::vector<Complex> rl = roots_at(std::span<const double>(al));
  append(tl, rl, true);
  for (int i = 1; i < samples; ++i) {
    const double tr = i == samples - 1 ? family.t1 : family.t0 + i * h;
    const std::vector<double> ar = family.at(tr);
    const auto rr = roots_at(std::span<const double>(ar));
    std::vector<Complex> ordered = thread(thread, tl, al, rl, tr, ar, rr, 0);
    append(tr, ordered, true);
    tl = tr;
    al = ar;
    rl = std::move(ordered);
  }
  return out;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::diverging: return "diverging";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

std::vector<double> default_q_grid() { return {1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0}; }

const SobolevEntry& SobolevEstimate::entry(std::size_t branch, double q) const {
  for (const auto& e : entries) {
    if (e.branch == branch && e.q == q) return e;
  }
  throw Error(ErrorCode::invalid_argument, "no Sobolev entry for the requested branch and q");
}

SobolevEstimate sobolev_profile(const RootBranchSet& branches, std::span<const double> q_grid, int levels) {
  if (levels < 3) throw Error(ErrorCode::invalid_argument, "sobolev_profile needs at least 3 levels");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < branches.t.size(); ++i) {
    if (branches.base[i]) idx.push_back(i);
  }
  const std::size_t coarse_step = std::size_t{1} << (levels - 1);
  if (idx.size() < 2 || (idx.size() - 1) % coarse_step != 0 || (idx.size() - 1) / coarse_step < 1) {
    throw Error(ErrorCode::invalid_argument, "base sample count minus one must be a multiple of 2^(levels-1)");
  }
  const double h = (branches.t[idx.back()] - branches.t[idx.front()]) / static_cast<double>(idx.size() - 1);
  SobolevEstimate est;
  est.q_grid.assign(q_grid.begin(), q_grid.end());
  est.levels = levels;
  for (std::size_t b = 0; b < branches.branch_count(); ++b) {
    const auto& v = branches.values[b];
    for (double q : q_grid) {
      if (!(q >= 1.0)) throw Error(ErrorCode::invalid_argument, "q must be >= 1");
      SobolevEntry e;
      e.branch = b;
      e.q = q;
      for (int k = levels - 1; k >= 0; --k) {
        const std::size_t step = std::size_t{1} << k;
        const double dt = h * static_cast<double>(step);
        double sum = 0.0;
        for (std::size_t i = 0; i + step < idx.size(); i += step) {
          sum += std::pow(std::abs(v[idx[i + step]] - v[idx[i]]) / dt, q) * dt;
        }
        e.integrals.push_back(sum);
      }
      const std::size_t n = e.integrals.size();
      const double x0 = e.integrals[n - 3], x1 = e.integrals[n - 2], x2 = e.integrals[n - 1];
      const double denom = (x2 - x1) - (x1 - x0);
      const double aitken = x2 - (x2 - x1) * (x2 - x1) / denom;
      e.extrapolated = std::isfinite(aitken) && denom != 0.0 ? aitken : x2;
      if (std::abs(x2 - x1) < 0.05 * std::max(std::abs(x2), std::abs(x1)) || (x1 == 0.0 && x2 == 0.0)) {
        e.verdict = Verdict::converged;
      } else if (x1 >= 1.2 * x0 && x2 >= 1.2 * x1) {
        e.verdict = Verdict::diverging;
      }
      est.entries.push_back(std::move(e));
    }
  }
  return est;
}

LocalPolynomialModel local_polynomial_model(const std::string& text, double x0, double x1) {
  if (!(x1 > x0)) throw Error(ErrorCode::invalid_argument, "window must have x1 > x0");
  const Expression f = Expression::parse(text, {"x", "y"});
  auto coeffs = f.polynomial_in(1);
  if (!coeffs) throw Error(ErrorCode::not_in_prepared_form, "\"" + text + "\" is not polynomial in y");
  constexpr int kSamples = 201;
  auto window_values = [&](const Expression& c) {
    std::vector<double> v(kSamples);
    for (int i = 0; i < kSamples; ++i) {
      const double x = x0 + (x1 - x0) * i / (kSamples - 1);
      const double xy[2] = {x, 0.0};
      v[i] = c.evaluate(xy);
    }
    return v;
  };
  double scale = 0.0;
  for (const auto& c : *coeffs) {
    for (double v : window_values(c)) scale = std::max(scale, std::abs(v));
  }
  // Drop top coefficients that vanish identically on the window.
  while (!coeffs->empty()) {
    const auto v = window_values(coeffs->back());
    if (std::any_of(v.begin(), v.end(), [&](double x) { return std::abs(x) > 1e-14 * scale; })) break;
    coeffs->pop_back();
  }
  if (coeffs->size() < 2) {
    throw Error(ErrorCode::not_in_prepared_form, "\"" + text + "\" has no positive power of y");
  }
  const Expression& top = coeffs->back();
  const auto tv = window_values(top);
  const bool pos = std::all_of(tv.begin(), tv.end(), [&](double x) { return x > 1e-12 * scale; });
  const bool neg = std::all_of(tv.begin(), tv.end(), [&](double x) { return x < -1e-12 * scale; });
  if (!pos && !neg) {
    throw Error(ErrorCode::not_in_prepared_form,
                "top coefficient " + top.to_string() + " vanishes or changes sign on the window");
  }
  LocalPolynomialModel m{{}, top, f};
  m.family.t0 = x0;
  m.family.t1 = x1;
  for (std::size_t k = 0; k + 1 < coeffs->size(); ++k) m.family.coefficients.push_back((*coeffs)[k] / top);
  return m;
}

ScalarField planar_field(const Expression& f, double x0, double x1, double y0, double y1) {
  const Geometry window = Geometry::rectangle(x1 - x0, y1 - y0, x0, y0);
  const Expression dx = f.derivative(0);
  const Expression dy = f.derivative(1);
  return ScalarField(
      window,
      [f, dx, dy](Point p) {
        const double v[2] = {p.x1, p.x2};
        return FieldSample{f.evaluate(v), {dx.evaluate(v), dy.evaluate(v)}};
      },
      Provenance::closed_form);
}

GraphCoverResult graph_cover_check(const ScalarField& f, const PolynomialFamily& family, int resolution, double tol,
                                   int samples) {
  const Geometry& g = f.geometry();
  const NodalCurveSet curves = extract_nodal(f, resolution, 2);
  std::vector<Point> points;
  for (const auto& c : curves.components) points.insert(points.end(), c.vertices.begin(), c.vertices.end());

  // Singular points count as nodal points; tolerances relative to the field.
  const NodeGrid grid(g, resolution);
  double fs = 0.0, gs = 0.0;
  for (int i = 0; i < grid.n1(); ++i) {
    for (int j = 0; j < grid.n2(); ++j) {
      const FieldSample s = f(grid.node(i, j));
      fs = std::max(fs, std::abs(s.value));
      gs = std::max(gs, g.gradient_norm(grid.node(i, j), s.gradient));
    }
  }
  const SingularSetEstimate sing = singular_points(f, resolution, 1e-6 * fs, 1e-3 * gs);
  points.insert(points.end(), sing.points.begin(), sing.points.end());

  const RootBranchSet branches = continuous_selection(family, samples);
  GraphCoverResult r;
  r.grid_spacing = curves.grid_spacing;
  r.points_checked = points.size();
  const std::vector<double>& t = branches.t;
  for (const Point& p : points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& branch : branches.values) {
      auto seg_dist = [&](std::size_t i) {
        const double ax = t[i], ay = branch[i].real();
        const double bx = t[i + 1], by = branch[i + 1].real();
        const double dx = bx - ax, dy = by - ay;
        const double len2 = dx * dx + dy * dy;
        double s = len2 > 0 ? ((p.x1 - ax) * dx + (p.x2 - ay) * dy) / len2 : 0.0;
        s = std::clamp(s, 0.0, 1.0);
        return std::hypot(p.x1 - ax - s * dx, p.x2 - ay - s * dy);
      };
      // Start at the segment over p.x1, then widen while segments can
      // still be closer than the best distance so far.
      const std::size_t n = t.size();
      std::size_t mid = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), p.x1) - t.begin());
      mid = std::clamp<std::size_t>(mid, 1, n - 1) - 1;
      best = std::min(best, seg_dist(mid));
      for (std::size_t i = mid + 1; i + 1 < n && t[i] - p.x1 <= best; ++i) best = std::min(best, seg_dist(i));
      for (std::size_t i = mid; i-- > 0 && p.x1 - t[i + 1] <= best;) best = std::min(best, seg_dist(i));
    }
    if (best > r.max_distance) {
      r.max_distance = best;
      r.worst = p;
    }
  }
  r.pass = r.max_distance <= tol;
  return r;
}

}  // namespace nodalab
