#include "nodalab/sweepout.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "nodalab/error.h"
#include "nodalab/grid.h"

namespace nodalab {

namespace {

constexpr double kPi = std::numbers::pi;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

void normalize(std::vector<double>& v) {
  const double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
}

std::vector<double> canonical(std::vector<double> v) {
  const ProjectiveCoefficients c(std::move(v));
  return std::vector<double>(c.values().begin(), c.values().end());
}

// First `count` primes, used as Halton bases.
std::vector<unsigned> primes(std::size_t count) {
  std::vector<unsigned> out;
  for (unsigned n = 2; out.size() < count; ++n) {
    if (std::all_of(out.begin(), out.end(), [n](unsigned p) { return n % p != 0; })) out.push_back(n);
  }
  return out;
}

double radical_inverse(std::uint64_t index, unsigned base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

// Quasi-random direction: randomly shifted Halton point pushed through
// Box-Muller, then normalised.
std::vector<double> quasi_random_direction(std::size_t dim, std::uint64_t index, std::span<const double> shift,
                                           std::span<const unsigned> bases) {
  std::vector<double> u(shift.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    u[k] = std::fmod(radical_inverse(index, bases[k]) + shift[k], 1.0);
    u[k] = std::clamp(u[k], 1e-12, 1.0 - 1e-12);
  }
  std::vector<double> v(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    const double r = std::sqrt(-2.0 * std::log(u[2 * (k / 2)]));
    const double a = 2.0 * kPi * u[2 * (k / 2) + 1];
    v[k] = (k % 2 == 0) ? r * std::cos(a) : r * std::sin(a);
  }
  if (dot(v, v) == 0.0) v[0] = 1.0;
  normalize(v);
  return v;
}

struct RestartResult {
  double value = -1.0;
  std::vector<double> theta;
  std::size_t evaluations = 0;
};

bool better(const RestartResult& a, const RestartResult& b) {
  if (a.value != b.value) return a.value > b.value;
  return std::lexicographical_compare(a.theta.begin(), a.theta.end(), b.theta.begin(), b.theta.end());
}

RestartResult coordinate_ascent(const SweepObjective& objective, std::vector<double> theta) {
  const std::size_t dim = objective.dimension();
  RestartResult r;
  theta = canonical(std::move(theta));
  double best = objective(theta);
  r.evaluations = 1;
  std::vector<double> mix;
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t k = 0; k < dim; ++k) {
      std::vector<double> u(dim, 0.0);
      u[k] = 1.0;
      const double c = theta[k];
      for (std::size_t i = 0; i < dim; ++i) u[i] -= c * theta[i];
      const double nu = std::sqrt(dot(u, u));
      if (nu < 1e-9) continue;
      for (double& x : u) x /= nu;
      const std::vector<double> a = objective.node_values(theta);
      const std::vector<double> b = objective.node_values(u);
      mix.resize(a.size());
      auto g = [&](double phi) {
        const double cp = std::cos(phi), sp = std::sin(phi);
        for (std::size_t i = 0; i < a.size(); ++i) mix[i] = cp * a[i] + sp * b[i];
        ++r.evaluations;
        return objective.contour_length(mix);
      };
      // Scan of the projective circle through theta and u (phi = 0 is theta).
      double best_phi = 0.0, best_val = best;
      for (int s = 0; s < 8; ++s) {
        const double phi = -kPi / 2 + s * kPi / 8;
        if (s == 4) continue;
        const double v = g(phi);
        if (v > best_val) {
          best_val = v;
          best_phi = phi;
        }
      }
      // Golden-section refinement around the scan maximum.
      const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
      double lo = best_phi - kPi / 8, hi = best_phi + kPi / 8;
      double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
      double g1 = g(x1), g2 = g(x2);
      for (int it = 0; it < 12; ++it) {
        if (g1 >= g2) {
          if (g1 > best_val) { best_val = g1; best_phi = x1; }
          hi = x2; x2 = x1; g2 = g1;
          x1 = hi - inv_phi * (hi - lo);
          g1 = g(x1);
        } else {
          if (g2 > best_val) { best_val = g2; best_phi = x2; }
          lo = x1; x1 = x2; g1 = g2;
          x2 = lo + inv_phi * (hi - lo);
          g2 = g(x2);
        }
      }
      if (g1 > best_val) { best_val = g1; best_phi = x1; }
      if (g2 > best_val) { best_val = g2; best_phi = x2; }
      if (best_val > best) {
        const double cp = std::cos(best_phi), sp = std::sin(best_phi);
        for (std::size_t i = 0; i < dim; ++i) theta[i] = cp * theta[i] + sp * u[i];
        normalize(theta);
        theta = canonical(std::move(theta));
        best = best_val;
      }
    }
  }
  r.value = best;
  r.theta = std::move(theta);
  return r;
}

template <class Task>
void parallel_for(std::size_t count, unsigned threads, Task task) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) task(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k; (k = next.fetch_add(1)) < count;) {
        try {
          task(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

SpectralBasis leading_modes(const SpectralBasis& basis, std::size_t count) {
  std::vector<std::size_t> idx(count);
  for (std::size_t k = 0; k < count; ++k) idx[k] = k;
  return basis.subset(idx);
}

}  // namespace

SweepObjective::SweepObjective(const SpectralBasis& basis, int resolution)
    : geometry_(basis.geometry()), dim_(basis.count()) {
  const NodeGrid grid(geometry_, resolution);
  n1_ = grid.n1();
  n2_ = grid.n2();
  c1_ = grid.cells1();
  c2_ = grid.cells2();
  nodes_.resize(static_cast<std::size_t>(n1_) * n2_);
  table_.resize(nodes_.size() * dim_);
  for (int i = 0; i < n1_; ++i) {
    for (int j = 0; j < n2_; ++j) {
      const std::size_t n = grid.index(i, j);
      nodes_[n] = grid.node(i, j);
      for (std::size_t k = 0; k < dim_; ++k) table_[n * dim_ + k] = basis.evaluate_mode(k, nodes_[n]).value;
    }
  }
}

std::vector<double> SweepObjective::node_values(std::span<const double> theta) const {
  if (theta.size() != dim_) throw Error(ErrorCode::dimension_mismatch, "theta does not match the basis");
  std::vector<double> out(nodes_.size());
  for (std::size_t n = 0; n < nodes_.size(); ++n) out[n] = dot(theta, std::span(table_).subspan(n * dim_, dim_));
  return out;
}

double SweepObjective::operator()(std::span<const double> theta) const {
  return contour_length(node_values(theta));
}

double SweepObjective::contour_length(std::span<const double> v) const {
  double total = 0.0;
  auto at = [&](int i, int j) { return v[static_cast<std::size_t>(i % n1_) * n2_ + (j % n2_)]; };
  auto node = [&](int i, int j) {
    Point p = nodes_[static_cast<std::size_t>(i % n1_) * n2_ + (j % n2_)];
    // Unwrap across the seam so that interpolation stays inside the cell.
    if (i >= n1_) p.x1 += geometry_.extent1();
    if (j >= n2_) p.x2 += geometry_.extent2();
    return p;
  };
  for (int i = 0; i < c1_; ++i) {
    for (int j = 0; j < c2_; ++j) {
      const std::array<double, 4> f{at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
      const std::array<bool, 4> neg{f[0] < 0, f[1] < 0, f[2] < 0, f[3] < 0};
      if (neg[0] == neg[1] && neg[1] == neg[2] && neg[2] == neg[3]) continue;
      const std::array<Point, 4> q{node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)};
      std::array<Point, 4> cross{};
      std::array<bool, 4> has{};
      for (int e = 0; e < 4; ++e) {
        const int a = e, b = (e + 1) % 4;
        if (neg[a] == neg[b]) continue;
        const double t = f[a] / (f[a] - f[b]);
        cross[e] = {q[a].x1 + t * (q[b].x1 - q[a].x1), q[a].x2 + t * (q[b].x2 - q[a].x2)};
        has[e] = true;
      }
      auto seg = [&](int a, int b) { total += geometry_.segment_length(cross[a], cross[b]); };
      if (has[0] && has[1] && has[2] && has[3]) {
        // Saddle: the sign of the cell average decides which diagonal connects.
        const bool centre_neg = (f[0] + f[1] + f[2] + f[3]) < 0;
        if (centre_neg == neg[0]) {
          seg(0, 1);
          seg(2, 3);
        } else {
          seg(3, 0);
          seg(1, 2);
        }
      } else {
        int a = -1, b = -1;
        for (int e = 0; e < 4; ++e) {
          if (!has[e]) continue;
          (a < 0 ? a : b) = e;
        }
        seg(a, b);
      }
    }
  }
  return total;
}

WidthEstimate estimate_phi_p(const SpectralBasis& basis, int p, int restarts, std::uint64_t seed,
                             const PhiOptions& options) {
  if (p < 0 || static_cast<std::size_t>(p) + 1 > basis.count()) {
    throw Error(ErrorCode::invalid_argument, "p + 1 must not exceed the basis size");
  }
  if (restarts < 1) throw Error(ErrorCode::invalid_argument, "restarts must be at least 1");
  const std::size_t dim = static_cast<std::size_t>(p) + 1;
  const SpectralBasis sub = leading_modes(basis, dim);
  const SweepObjective objective(sub, options.resolution);

  const std::size_t pairs = (dim + 1) / 2;
  const std::vector<unsigned> bases = primes(2 * pairs);
  std::vector<double> shift(2 * pairs);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (double& s : shift) s = unif(rng);

  std::vector<std::vector<double>> starts;
  for (int r = 0; r < restarts; ++r) starts.push_back(quasi_random_direction(dim, r + 1, shift, bases));
  for (const auto& w : options.warm_starts) {
    if (w.size() > dim) throw Error(ErrorCode::dimension_mismatch, "warm start longer than p + 1");
    std::vector<double> v(w);
    v.resize(dim, 0.0);
    if (dot(v, v) == 0.0 || !std::isfinite(dot(v, v))) continue;
    normalize(v);
    starts.push_back(std::move(v));
  }

  std::vector<RestartResult> results(starts.size());
  parallel_for(starts.size(), options.threads,
               [&](std::size_t k) { results[k] = coordinate_ascent(objective, starts[k]); });

  RestartResult best = results.front();
  std::size_t evaluations = 0;
  for (const auto& r : results) {
    evaluations += r.evaluations;
    if (better(r, best)) best = r;
  }

  WidthEstimate out;
  out.p = p;
  out.seed = seed;
  out.evaluations = evaluations;
  out.argmax = ProjectiveCoefficients(best.theta);
  const ScalarField field = combination_field(sub, best.theta);
  const NodalCurveSet curves = extract_nodal(field, options.resolution, options.max_refine);
  out.phi_p_lower = boundary_mass(field, curves).mass;
  out.sup_length = curves.total_length();
  return out;
}

WeylFit weyl_fit(std::span<const WeylPoint> points) {
  WeylFit fit;
  for (const auto& pt : points) {
    if (!(pt.p > 0.0) || !std::isfinite(pt.p)) throw Error(ErrorCode::invalid_argument, "p values must be positive");
    if (!(pt.value > 0.0) || !std::isfinite(pt.value)) {
      throw Error(ErrorCode::invalid_argument, "fit values must be positive");
    }
    fit.p_values.push_back(pt.p);
    fit.sup_values.push_back(pt.value);
  }
  const std::size_t n = points.size();
  std::vector<double> sorted = fit.p_values;
  std::sort(sorted.begin(), sorted.end());
  if (n < 2 || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorCode::invalid_argument, "need at least two points with distinct p");
  }
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += std::log(fit.p_values[k]);
    my += std::log(fit.sup_values[k]);
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = std::log(fit.p_values[k]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(fit.sup_values[k]) - my);
  }
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.constant = std::exp(intercept);
  double rss = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = std::log(fit.sup_values[k]) - intercept - fit.exponent * std::log(fit.p_values[k]);
    rss += e * e;
  }
  fit.residual = std::sqrt(rss / n);
  return fit;
}

NonConcentrationTable sweepout_nonconcentration_check(const SpectralBasis& basis, int p, int theta_samples,
                                                      std::span<const double> radii, std::uint64_t seed,
                                                      const NonConcentrationOptions& options) {
  if (theta_samples < 1) throw Error(ErrorCode::invalid_argument, "theta_samples must be at least 1");
  if (p < 0 || static_cast<std::size_t>(p) + 1 > basis.count()) {
    throw Error(ErrorCode::invalid_argument, "p + 1 must not exceed the basis size");
  }
  const SpectralBasis sub = leading_modes(basis, static_cast<std::size_t>(p) + 1);
  NonConcentrationTable table{std::vector<double>(radii.begin(), radii.end()),
                              std::vector<double>(radii.size(), 0.0)};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int s = 0; s < theta_samples; ++s) {
    std::vector<double> theta(sub.count());
    for (double& t : theta) t = normal(rng);
    if (dot(theta, theta) == 0.0) theta[0] = 1.0;
    const ScalarField field = combination_field(sub, theta);
    NodalCurveSet curves = extract_nodal(field, options.resolution, options.max_refine);
    const MassEstimate mass = boundary_mass(field, curves);
    for (std::size_t k = 0; k < curves.components.size(); ++k) curves.components[k].sign_change = mass.sign_change[k];
    const ConcentrationProfile prof =
        ball_concentration_profile(curves, radii, options.center_grid, ComponentFilter::sign_changing);
    for (std::size_t k = 0; k < radii.size(); ++k) table.values[k] = std::max(table.values[k], prof.values[k]);
  }
  return table;
}

FlatScan flat_continuity_scan(const SpectralBasis& basis, std::span<const ProjectiveCoefficients> path,
                              int resolution) {
  if (path.size() < 2) throw Error(ErrorCode::invalid_argument, "path needs at least two points");
  const double area = basis.geometry().area();
  FlatScan scan;
  auto field_at = [&](const ProjectiveCoefficients& c) {
    return combination_field(basis, std::vector<double>(c.values().begin(), c.values().end()));
  };
  ScalarField prev = field_at(path[0]);
  for (std::size_t k = 1; k < path.size(); ++k) {
    ScalarField next = field_at(path[k]);
    const double d = symmetric_difference_area(prev, next, resolution);
    scan.steps.push_back(std::min(d, area - d));
    scan.max_proxy = std::max(scan.max_proxy, scan.steps.back());
    prev = std::move(next);
  }
  return scan;
}

double almgren_bound(double s) {
  if (s <= 0.0) return -std::numeric_limits<double>::infinity();
  if (s >= 2.0 * kPi) return std::numeric_limits<double>::infinity();
  const double h = 0.5 * s;
  return -std::cos(h) / std::sin(h);
}

AlmgrenResult almgren_cycle_check(const ScalarField& f0, const ScalarField& f1, std::span<const double> partition,
                                  int resolution) {
  if (partition.size() < 2) throw Error(ErrorCode::invalid_argument, "partition needs K >= 1 intervals");
  if (partition.front() != 0.0 || std::abs(partition.back() - 2.0 * kPi) > 1e-12) {
    throw Error(ErrorCode::invalid_argument, "partition must run from 0 to 2 pi");
  }
  for (std::size_t k = 1; k < partition.size(); ++k) {
    if (!(partition[k] > partition[k - 1])) throw Error(ErrorCode::invalid_argument, "partition must increase");
  }
  const std::size_t slabs = partition.size() - 1;
  std::vector<double> bounds(partition.size());
  for (std::size_t k = 0; k < partition.size(); ++k) bounds[k] = almgren_bound(partition[k]);
  bounds.back() = std::numeric_limits<double>::infinity();

  const AreaGrid grid(f0.geometry(), resolution);
  constexpr int kSub = 4;
  AlmgrenResult out;
  out.slab_areas.assign(slabs, 0.0);
  std::vector<double> overlap(slabs * slabs, 0.0);
  double scale = 0.0;
  for (int i = 0; i < grid.corners1(); ++i) {
    for (int j = 0; j < grid.corners2(); ++j) scale = std::max(scale, std::abs(f0.value(grid.corner(i, j))));
  }
  const double zero_tol = 1e-12 * std::max(scale, 1e-300);
  double zero_area = 0.0;
  std::vector<std::size_t> member;
  for (int i = 0; i < grid.cells1(); ++i) {
    for (int j = 0; j < grid.cells2(); ++j) {
      const double cell = grid.cell_area(i, j);
      const std::array<double, 4> c{f0.value(grid.corner(i, j)), f0.value(grid.corner(i + 1, j)),
                                    f0.value(grid.corner(i + 1, j + 1)), f0.value(grid.corner(i, j + 1))};
      const bool all_pos = std::all_of(c.begin(), c.end(), [&](double x) { return x > zero_tol; });
      const bool all_neg = std::all_of(c.begin(), c.end(), [&](double x) { return x < -zero_tol; });
      if (std::all_of(c.begin(), c.end(), [&](double x) { return std::abs(x) <= zero_tol; })) zero_area += cell;
      if (!all_pos && !all_neg) {
        out.excluded_area += cell;
        continue;
      }
      const Point o = grid.corner(i, j);
      const double w = cell / (kSub * kSub);
      for (int a = 0; a < kSub; ++a) {
        for (int b = 0; b < kSub; ++b) {
          const Point x{o.x1 + (a + 0.5) * grid.h1() / kSub, o.x2 + (b + 0.5) * grid.h2() / kSub};
          const double d = f0.value(x);
          if (std::abs(d) <= zero_tol) continue;
          const double ratio = f1.value(x) / d;
          member.clear();
          for (std::size_t k = 0; k < slabs; ++k) {
            if (bounds[k] < ratio && ratio < bounds[k + 1]) member.push_back(k);
          }
          for (std::size_t k : member) out.slab_areas[k] += w;
          for (std::size_t u = 0; u < member.size(); ++u) {
            for (std::size_t v = u + 1; v < member.size(); ++v) overlap[member[u] * slabs + member[v]] += w;
          }
        }
      }
    }
  }
  if (zero_area > 1e-3 * f0.geometry().area()) {
    throw Error(ErrorCode::degenerate_denominator, "f0 vanishes on a region of positive area");
  }
  for (double a : out.slab_areas) out.total_area += a;
  for (double a : overlap) out.max_overlap = std::max(out.max_overlap, a);
  return out;
}

}  // namespace nodalab
