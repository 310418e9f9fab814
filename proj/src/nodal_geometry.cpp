#include "nodalab/nodal_geometry.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numbers>
#include <optional>
#include <unordered_map>

#include "nodalab/error.h"
#include "nodalab/grid.h"

namespace nodalab {

double NodalCurveSet::total_length() const {
  double sum = 0.0;
  for (const auto& c : components) sum += c.length;
  return sum;
}

double NodalCurveSet::sign_change_length() const {
  double sum = 0.0;
  for (const auto& c : components) {
    if (c.sign_change) sum += c.length;
  }
  return sum;
}

namespace {

struct Corner {
  Point p;
  FieldSample s;
};

Point lerp(Point a, Point b, double t) { return {a.x1 + t * (b.x1 - a.x1), a.x2 + t * (b.x2 - a.x2)}; }

double polyline_length(const Geometry& g, std::span<const Point> v, bool closed) {
  double len = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) len += g.segment_length(v[i - 1], v[i]);
  if (closed && v.size() > 2) len += g.segment_length(v.back(), v.front());
  return len;
}

// Illinois-modified regula falsi for a bracketed sign change of `fn` on
// [0, 1]; returns the parameter of the root.
template <class Fn>
double bracketed_root(Fn&& fn, double f0, double f1, double rel_tol) {
  double a = 0.0, b = 1.0, fa = f0, fb = f1;
  int side = 0;
  for (int it = 0; it < 200 && (b - a) > rel_tol; ++it) {
    double c = (fa * b - fb * a) / (fa - fb);
    if (!(c > a && c < b)) c = 0.5 * (a + b);
    // Fall back to bisection when the secant step stalls near an endpoint.
    if ((it % 4) == 3) c = 0.5 * (a + b);
    const double fc = fn(c);
    if (fc == 0.0) return c;
    if ((fc > 0.0) == (fa > 0.0)) {
      a = c;
      fa = fc;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = c;
      fb = fc;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
  }
  return 0.5 * (a + b);
}

// Merges near-coincident points; periodic axes wrap their bucket index.
class VertexPool {
 public:
  VertexPool(const Geometry& g, double tol) : g_(g), tol_(tol), q_(std::max(tol, 1e-300) * 4.0) {
    m1_ = g.periodic1() ? std::max<std::int64_t>(1, static_cast<std::int64_t>(g.extent1() / q_)) : 0;
    m2_ = g.periodic2() ? std::max<std::int64_t>(1, static_cast<std::int64_t>(g.extent2() / q_)) : 0;
  }

  int insert(Point p) {
    p = g_.canonical(p);
    const auto [k1, k2] = key(p);
    for (std::int64_t d1 = -1; d1 <= 1; ++d1) {
      for (std::int64_t d2 = -1; d2 <= 1; ++d2) {
        auto it = buckets_.find(pack(wrap(k1 + d1, m1_), wrap(k2 + d2, m2_)));
        if (it == buckets_.end()) continue;
        for (int id : it->second) {
          if (g_.distance(points_[id], p) <= tol_) return id;
        }
      }
    }
    const int id = static_cast<int>(points_.size());
    points_.push_back(p);
    buckets_[pack(k1, k2)].push_back(id);
    return id;
  }

  const std::vector<Point>& points() const { return points_; }

 private:
  std::pair<std::int64_t, std::int64_t> key(Point p) const {
    const auto o = g_.origin();
    std::int64_t k1 = static_cast<std::int64_t>(std::floor((p.x1 - o.x1) / q_));
    std::int64_t k2 = static_cast<std::int64_t>(std::floor((p.x2 - o.x2) / q_));
    return {wrap(k1, m1_), wrap(k2, m2_)};
  }
  static std::int64_t wrap(std::int64_t k, std::int64_t m) {
    if (m == 0) return k;
    k %= m;
    return k < 0 ? k + m : k;
  }
  static std::uint64_t pack(std::int64_t a, std::int64_t b) {
    return (static_cast<std::uint64_t>(a) << 32) ^ static_cast<std::uint64_t>(b & 0xffffffff);
  }

  const Geometry& g_;
  double tol_;
  double q_;
  std::int64_t m1_;
  std::int64_t m2_;
  std::unordered_map<std::uint64_t, std::vector<int>> buckets_;
  std::vector<Point> points_;
};

using Segment = std::pair<Point, Point>;

// Chains segments into maximal polylines, splitting at junctions and ends.
std::vector<NodalComponent> assemble(const Geometry& g, const std::vector<Segment>& segments, double merge_tol,
                                     bool sign_change) {
  VertexPool pool(g, merge_tol);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(segments.size());
  for (const auto& [a, b] : segments) {
    const int ia = pool.insert(a);
    const int ib = pool.insert(b);
    if (ia != ib) edges.emplace_back(ia, ib);
  }
  const auto& pts = pool.points();
  std::vector<std::vector<std::pair<int, int>>> adj(pts.size());
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    adj[edges[e].first].emplace_back(edges[e].second, e);
    adj[edges[e].second].emplace_back(edges[e].first, e);
  }
  std::vector<char> used(edges.size(), 0);
  std::vector<NodalComponent> out;

  auto walk = [&](int start, int first_edge) {
    NodalComponent comp;
    comp.sign_change = sign_change;
    comp.vertices.push_back(pts[start]);
    int cur = start;
    int e = first_edge;
    while (e >= 0) {
      used[e] = 1;
      const int next = edges[e].first == cur ? edges[e].second : edges[e].first;
      cur = next;
      if (cur == start) {
        comp.closed = true;
        break;
      }
      comp.vertices.push_back(pts[cur]);
      e = -1;
      if (adj[cur].size() != 2) break;
      for (const auto& [nb, ne] : adj[cur]) {
        if (!used[ne]) {
          e = ne;
          break;
        }
      }
    }
    comp.length = polyline_length(g, comp.vertices, comp.closed);
    out.push_back(std::move(comp));
  };

  for (int v = 0; v < static_cast<int>(pts.size()); ++v) {
    if (adj[v].size() == 2) continue;
    for (const auto& [nb, e] : adj[v]) {
      if (!used[e]) walk(v, e);
    }
  }
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    if (!used[e]) walk(edges[e].first, e);
  }
  return out;
}

struct EdgeKey {
  std::array<double, 4> c;
  bool operator==(const EdgeKey& o) const { return c == o.c; }
};

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (double d : k.c) {
      std::uint64_t bits;
      std::memcpy(&bits, &d, sizeof bits);
      h = (h ^ bits) * 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

struct EdgeResult {
  std::optional<Point> crossing;
  std::optional<Point> touch;
  bool double_crossing = false;
};

class Extractor {
 public:
  Extractor(const ScalarField& field, int resolution, int max_refine)
      : field_(field), grid_(field.geometry(), resolution), max_refine_(std::max(0, max_refine)) {}

  NodalCurveSet run() {
    const int n1 = grid_.n1();
    const int n2 = grid_.n2();
    std::vector<FieldSample> nodes(static_cast<std::size_t>(n1) * n2);
    double scale = 0.0;
    double gmax = 0.0;
    for (int i = 0; i < n1; ++i) {
      for (int j = 0; j < n2; ++j) {
        const FieldSample s = field_(grid_.node(i, j));
        nodes[grid_.index(i, j)] = s;
        scale = std::max(scale, std::abs(s.value));
        gmax = std::max(gmax, std::hypot(s.gradient.d1, s.gradient.d2));
      }
    }
    if (!(scale >= std::numeric_limits<double>::min()) || !std::isfinite(scale)) {
      throw Error(ErrorCode::zero_field, "field vanishes at every lattice node");
    }
    zero_shift_ = 1e-12 * scale;
    touch_tol_ = 1e-9 * scale;
    gmax_ = gmax;
    for (auto& s : nodes) {
      if (s.value == 0.0) s.value = zero_shift_;
    }

    for (int i = 0; i < grid_.cells1(); ++i) {
      for (int j = 0; j < grid_.cells2(); ++j) {
        std::array<Corner, 4> c{
            Corner{grid_.node(i, j), nodes[grid_.index(i, j)]},
            Corner{grid_.node(i + 1, j), nodes[grid_.index(i + 1, j)]},
            Corner{grid_.node(i + 1, j + 1), nodes[grid_.index(i + 1, j + 1)]},
            Corner{grid_.node(i, j + 1), nodes[grid_.index(i, j + 1)]},
        };
        process(c, 0);
      }
    }

    NodalCurveSet out{field_.geometry(), {}, 0, 0, 0.0, 0.0};
    const double merge_tol = 1e-7 * grid_.spacing();
    out.components = assemble(field_.geometry(), sign_segments_, merge_tol, true);
    auto touching = assemble(field_.geometry(), touch_segments_, merge_tol, false);
    out.components.insert(out.components.end(), std::make_move_iterator(touching.begin()),
                          std::make_move_iterator(touching.end()));
    out.refine_depth = depth_used_;
    out.grid_spacing = grid_.spacing();
    out.vertex_tolerance = touch_tol_;
    return out;
  }

 private:
  FieldSample eval(Point p) const {
    FieldSample s = field_(p);
    if (s.value == 0.0) s.value = zero_shift_;
    return s;
  }

  EdgeResult analyse_edge(const Corner& a, const Corner& b) {
    EdgeKey key{{a.p.x1, a.p.x2, b.p.x1, b.p.x2}};
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    EdgeResult r;
    const double fa = a.s.value;
    const double fb = b.s.value;
    const Vec2 dir{b.p.x1 - a.p.x1, b.p.x2 - a.p.x2};
    if ((fa > 0.0) != (fb > 0.0)) {
      const double t = bracketed_root([&](double s) { return eval(lerp(a.p, b.p, s)).value; }, fa, fb, 1e-12);
      r.crossing = lerp(a.p, b.p, t);
    } else {
      const double sigma = fa > 0.0 ? 1.0 : -1.0;
      const double da = a.s.gradient.d1 * dir.d1 + a.s.gradient.d2 * dir.d2;
      const double db = b.s.gradient.d1 * dir.d1 + b.s.gradient.d2 * dir.d2;
      if (sigma * da < 0.0 && sigma * db > 0.0) {
        auto deriv = [&](double s) {
          const FieldSample q = eval(lerp(a.p, b.p, s));
          return q.gradient.d1 * dir.d1 + q.gradient.d2 * dir.d2;
        };
        const double t = bracketed_root(deriv, da, db, 1e-12);
        const Point q = lerp(a.p, b.p, t);
        const double fq = field_(q).value;
        if (std::abs(fq) <= touch_tol_) {
          r.touch = q;
        } else if ((fq > 0.0) != (sigma > 0.0)) {
          r.double_crossing = true;
        }
      }
    }
    cache_.emplace(key, r);
    return r;
  }

  bool near_singular(const std::array<Corner, 4>& c) const {
    const double d = std::hypot(c[2].p.x1 - c[0].p.x1, c[2].p.x2 - c[0].p.x2);
    for (const auto& k : c) {
      const double g = std::hypot(k.s.gradient.d1, k.s.gradient.d2);
      if (std::abs(k.s.value) < 0.2 * gmax_ * d && g < 0.2 * gmax_) return true;
    }
    return false;
  }

  void process(const std::array<Corner, 4>& c, int depth) {
    depth_used_ = std::max(depth_used_, depth);
    // Edges: bottom 0->1, right 1->2, top 3->2, left 0->3 (all increasing).
    const std::array<EdgeResult, 4> e{analyse_edge(c[0], c[1]), analyse_edge(c[1], c[2]),
                                      analyse_edge(c[3], c[2]), analyse_edge(c[0], c[3])};
    int ncross = 0;
    int ntouch = 0;
    bool dbl = false;
    for (const auto& r : e) {
      ncross += r.crossing.has_value();
      ntouch += r.touch.has_value();
      dbl = dbl || r.double_crossing;
    }
    if (depth < max_refine_ && (ncross == 4 || dbl || ntouch % 2 == 1 || ntouch > 2 || near_singular(c))) {
      split(c, depth);
      return;
    }
    if (ncross == 2) {
      std::array<Point, 2> pts;
      int k = 0;
      for (const auto& r : e) {
        if (r.crossing) pts[k++] = *r.crossing;
      }
      sign_segments_.emplace_back(pts[0], pts[1]);
    } else if (ncross == 4) {
      const Point centre = lerp(c[0].p, c[2].p, 0.5);
      const bool centre_pos = eval(centre).value > 0.0;
      if (centre_pos == (c[0].s.value > 0.0)) {
        sign_segments_.emplace_back(*e[0].crossing, *e[1].crossing);
        sign_segments_.emplace_back(*e[2].crossing, *e[3].crossing);
      } else {
        sign_segments_.emplace_back(*e[3].crossing, *e[0].crossing);
        sign_segments_.emplace_back(*e[1].crossing, *e[2].crossing);
      }
    }
    if (ntouch >= 2) emit_touch(e);
  }

  void emit_touch(const std::array<EdgeResult, 4>& e) {
    std::vector<Point> t;
    for (const auto& r : e) {
      if (r.touch) t.push_back(*r.touch);
    }
    const Geometry& g = field_.geometry();
    if (t.size() == 2) {
      touch_segments_.emplace_back(t[0], t[1]);
    } else if (t.size() == 3) {
      std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {1, 2}, {0, 2}}};
      auto best = *std::min_element(pairs.begin(), pairs.end(), [&](auto x, auto y) {
        return g.distance(t[x.first], t[x.second]) < g.distance(t[y.first], t[y.second]);
      });
      touch_segments_.emplace_back(t[best.first], t[best.second]);
    } else if (t.size() == 4) {
      const std::array<std::array<int, 4>, 3> pairings{{{0, 1, 2, 3}, {0, 3, 1, 2}, {0, 2, 1, 3}}};
      double best = std::numeric_limits<double>::infinity();
      int pick = 0;
      for (int k = 0; k < 3; ++k) {
        const auto& p = pairings[k];
        const double len = g.distance(t[p[0]], t[p[1]]) + g.distance(t[p[2]], t[p[3]]);
        if (len < best) {
          best = len;
          pick = k;
        }
      }
      const auto& p = pairings[pick];
      touch_segments_.emplace_back(t[p[0]], t[p[1]]);
      touch_segments_.emplace_back(t[p[2]], t[p[3]]);
    }
  }

  void split(const std::array<Corner, 4>& c, int depth) {
    auto mk = [&](Point p) { return Corner{p, eval(p)}; };
    const Corner m01 = mk(lerp(c[0].p, c[1].p, 0.5));
    const Corner m12 = mk(lerp(c[1].p, c[2].p, 0.5));
    const Corner m32 = mk(lerp(c[3].p, c[2].p, 0.5));
    const Corner m03 = mk(lerp(c[0].p, c[3].p, 0.5));
    const Corner mid = mk(lerp(c[0].p, c[2].p, 0.5));
    process({c[0], m01, mid, m03}, depth + 1);
    process({m01, c[1], m12, mid}, depth + 1);
    process({mid, m12, c[2], m32}, depth + 1);
    process({m03, mid, m32, c[3]}, depth + 1);
  }

  const ScalarField& field_;
  NodeGrid grid_;
  int max_refine_;
  double zero_shift_ = 0.0;
  double touch_tol_ = 0.0;
  double gmax_ = 0.0;
  int depth_used_ = 0;
  std::unordered_map<EdgeKey, EdgeResult, EdgeKeyHash> cache_;
  std::vector<Segment> sign_segments_;
  std::vector<Segment> touch_segments_;
};

}  // namespace

NodalCurveSet extract_nodal(const ScalarField& field, int resolution, int max_refine) {
  if (resolution < 8) throw Error(ErrorCode::resolution, "nodal extraction needs resolution >= 8");
  Extractor ex(field, resolution, max_refine);
  NodalCurveSet out = ex.run();
  out.resolution = resolution;
  return out;
}

MassEstimate boundary_mass(const ScalarField& field, const NodalCurveSet& curves) {
  const Geometry& g = field.geometry();
  MassEstimate out;
  const double base = 0.5 * curves.grid_spacing;
  auto side_sign = [&](Point m, Vec2 n, double delta) {
    const double fp = field.value(g.canonical({m.x1 + delta * n.d1, m.x2 + delta * n.d2}));
    const double fm = field.value(g.canonical({m.x1 - delta * n.d1, m.x2 - delta * n.d2}));
    return (fp > 0.0) != (fm > 0.0);
  };
  for (const auto& comp : curves.components) {
    double changing = 0.0;
    double total = 0.0;
    const std::size_t nseg = comp.closed ? comp.vertices.size() : comp.vertices.size() - 1;
    for (std::size_t s = 0; s < nseg && comp.vertices.size() >= 2; ++s) {
      const Point a = comp.vertices[s];
      const Point b = comp.vertices[(s + 1) % comp.vertices.size()];
      const Vec2 d = g.displacement(a, b);
      const double len = g.segment_length(a, b);
      const double dn = std::hypot(d.d1, d.d2);
      if (dn == 0.0) continue;
      const Point m{a.x1 + 0.5 * d.d1, a.x2 + 0.5 * d.d2};
      const Vec2 n{-d.d2 / dn, d.d1 / dn};
      bool cls = side_sign(m, n, base);
      if (cls != side_sign(m, n, base / 4.0)) {
        ++out.degenerate_segments;
        cls = side_sign(m, n, base / 16.0);
      }
      total += len;
      if (cls) changing += len;
    }
    const bool sign_change = total > 0.0 && changing > 0.5 * total;
    out.sign_change.push_back(sign_change);
    if (sign_change) out.mass += comp.length;
  }
  return out;
}

SingularSetEstimate singular_points(const ScalarField& field, int resolution, double eps_f, double eps_g) {
  if (!(eps_f > 0.0) || !(eps_g > 0.0)) throw Error(ErrorCode::invalid_argument, "tolerances must be positive");
  const Geometry& g = field.geometry();
  NodeGrid grid(g, resolution);
  const double h = grid.spacing();
  auto score = [&](Point p) {
    const FieldSample s = field(g.canonical(p));
    return std::max(std::abs(s.value) / eps_f, g.gradient_norm(p, s.gradient) / eps_g);
  };
  const int n1 = grid.n1();
  const int n2 = grid.n2();
  std::vector<double> node_score(static_cast<std::size_t>(n1) * n2);
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) node_score[grid.index(i, j)] = score(grid.node(i, j));
  }
  struct Candidate {
    double s;
    Point p;
  };
  std::vector<Candidate> candidates;
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      const double s = node_score[grid.index(i, j)];
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          int a = i + di, b = j + dj;
          if (g.periodic1()) a = (a + n1) % n1;
          if (g.periodic2()) b = (b + n2) % n2;
          if (a < 0 || a >= n1 || b < 0 || b >= n2) continue;
          if (node_score[grid.index(a, b)] < s) {
            is_min = false;
            break;
          }
        }
      }
      if (!is_min || s > 64.0) continue;
      // Compass search on the continuous score.
      Point x = grid.node(i, j);
      double sx = s;
      double step = 0.5 * h;
      for (int it = 0; it < 4000 && step > 1e-12 * h; ++it) {
        bool moved = false;
        for (const auto& [u, v] : std::array<std::pair<double, double>, 8>{
                 {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}}}) {
          Point y{x.x1 + step * u, x.x2 + step * v};
          if (!g.periodic1()) y.x1 = std::clamp(y.x1, g.origin().x1, g.origin().x1 + g.extent1());
          if (!g.periodic2()) y.x2 = std::clamp(y.x2, g.origin().x2, g.origin().x2 + g.extent2());
          const double sy = score(y);
          if (sy < sx) {
            x = y;
            sx = sy;
            moved = true;
            break;
          }
        }
        if (!moved) step *= 0.5;
      }
      if (sx <= 1.0) candidates.push_back({sx, g.canonical(x)});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tuple(a.s, a.p.x1, a.p.x2) < std::tuple(b.s, b.p.x1, b.p.x2);
  });
  SingularSetEstimate out{{}, eps_f, eps_g};
  for (const auto& c : candidates) {
    const bool isolated = std::all_of(out.points.begin(), out.points.end(),
                                      [&](Point q) { return g.distance(q, c.p) >= 2.0 * h; });
    if (isolated) out.points.push_back(c.p);
  }
  return out;
}

double length_in_ball(const Geometry& g, std::span<const Point> v, bool closed, Point center, double r) {
  if (v.size() < 2) return 0.0;
  double total = 0.0;
  const std::size_t nseg = closed ? v.size() : v.size() - 1;
  const bool sphere = g.kind() == GeometryKind::sphere;
  const auto c3 = sphere ? Geometry::embed(center) : std::array<double, 3>{};
  const double rho = sphere ? 2.0 * std::sin(0.5 * r) : r;
  for (std::size_t s = 0; s < nseg; ++s) {
    const Point a = v[s];
    const Point b = v[(s + 1) % v.size()];
    const double len = g.segment_length(a, b);
    if (len == 0.0) continue;
    // Cheap rejection: both endpoints farther than r + len.
    if (g.distance(center, a) > r + len) continue;
    std::array<double, 3> p0{}, d{};
    if (sphere) {
      const auto A = Geometry::embed(a);
      const auto B = Geometry::embed(b);
      for (int k = 0; k < 3; ++k) {
        p0[k] = A[k] - c3[k];
        d[k] = B[k] - A[k];
      }
    } else {
      const Vec2 ca = g.displacement(center, a);
      const Vec2 ab = g.displacement(a, b);
      p0 = {ca.d1, ca.d2, 0.0};
      d = {ab.d1, ab.d2, 0.0};
    }
    const double qa = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    const double qb = 2.0 * (p0[0] * d[0] + p0[1] * d[1] + p0[2] * d[2]);
    const double qc = p0[0] * p0[0] + p0[1] * p0[1] + p0[2] * p0[2] - rho * rho;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc <= 0.0) continue;
    const double sq = std::sqrt(disc);
    const double t0 = std::max(0.0, (-qb - sq) / (2.0 * qa));
    const double t1 = std::min(1.0, (-qb + sq) / (2.0 * qa));
    if (t1 > t0) total += (t1 - t0) * len;
  }
  return total;
}

ConcentrationProfile ball_concentration_profile(const NodalCurveSet& curves, std::span<const double> radii,
                                                int center_grid, ComponentFilter filter) {
  if (center_grid < 16) throw Error(ErrorCode::invalid_argument, "center_grid must be at least 16");
  const Geometry& g = curves.geometry;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0)) throw Error(ErrorCode::invalid_argument, "radii must be positive");
    if (k > 0 && !(radii[k] < radii[k - 1])) throw Error(ErrorCode::invalid_argument, "radii must be decreasing");
    if (radii[k] > g.max_ball_radius()) {
      throw Error(ErrorCode::invalid_argument, "radius exceeds the injectivity-scale cap of the geometry");
    }
  }
  ConcentrationProfile out;
  out.radii.assign(radii.begin(), radii.end());
  out.values.assign(radii.size(), 0.0);
  out.argmax_centers.assign(radii.size(), Point{});
  const int g1 = g.kind() == GeometryKind::sphere ? center_grid / 2 : center_grid;
  const int g2 = center_grid;
  for (int i = 0; i < g1; ++i) {
    for (int j = 0; j < g2; ++j) {
      Point c{g.origin().x1 + g.extent1() * i / g1, g.origin().x2 + g.extent2() * j / g2};
      if (g.kind() == GeometryKind::sphere) c.x1 = g.extent1() * (i + 0.5) / g1;
      for (std::size_t k = 0; k < radii.size(); ++k) {
        double sum = 0.0;
        for (const auto& comp : curves.components) {
          if (filter == ComponentFilter::sign_changing && !comp.sign_change) continue;
          sum += length_in_ball(g, comp.vertices, comp.closed, c, radii[k]);
        }
        if (sum > out.values[k]) {
          out.values[k] = sum;
          out.argmax_centers[k] = c;
        }
      }
    }
  }
  return out;
}

RectifiableSet RectifiableSet::from_curves(const NodalCurveSet& curves, ComponentFilter filter) {
  RectifiableSet set{curves.geometry, {}, {}, {}};
  for (const auto& c : curves.components) {
    if (filter == ComponentFilter::sign_changing && !c.sign_change) continue;
    if (c.vertices.size() == 1) {
      set.points.push_back(c.vertices.front());
    } else {
      set.polylines.push_back(c.vertices);
      set.closed.push_back(c.closed);
    }
  }
  return set;
}

double RectifiableSet::length() const {
  double sum = 0.0;
  for (std::size_t k = 0; k < polylines.size(); ++k) {
    sum += polyline_length(geometry, polylines[k], k < closed.size() && closed[k]);
  }
  return sum;
}

namespace {

struct Nearest {
  double distance;
  Vec2 direction;  // unit chart direction from the set towards the query
};

Nearest distance_to_segment(const Geometry& g, Point p, Point a, Point b) {
  if (g.kind() == GeometryKind::sphere) {
    const auto P = Geometry::embed(p);
    const auto A = Geometry::embed(a);
    const auto B = Geometry::embed(b);
    const std::array<double, 3> n{A[1] * B[2] - A[2] * B[1], A[2] * B[0] - A[0] * B[2], A[0] * B[1] - A[1] * B[0]};
    const double nn = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    double best = std::min(g.distance(p, a), g.distance(p, b));
    if (nn > 1e-15) {
      const double pn = (P[0] * n[0] + P[1] * n[1] + P[2] * n[2]) / nn;
      const std::array<double, 3> q{P[0] - pn * n[0] / nn, P[1] - pn * n[1] / nn, P[2] - pn * n[2] / nn};
      auto triple = [&](const std::array<double, 3>& u, const std::array<double, 3>& v) {
        return (u[1] * v[2] - u[2] * v[1]) * n[0] + (u[2] * v[0] - u[0] * v[2]) * n[1] +
               (u[0] * v[1] - u[1] * v[0]) * n[2];
      };
      if (triple(A, q) >= 0.0 && triple(q, B) >= 0.0) best = std::min(best, std::asin(std::min(1.0, std::abs(pn))));
    }
    return {best, {1.0, 0.0}};
  }
  const Vec2 ap = g.displacement(a, p);
  const Vec2 ab = g.displacement(a, b);
  const double l2 = ab.d1 * ab.d1 + ab.d2 * ab.d2;
  const double t = l2 > 0.0 ? std::clamp((ap.d1 * ab.d1 + ap.d2 * ab.d2) / l2, 0.0, 1.0) : 0.0;
  const Vec2 diff{ap.d1 - t * ab.d1, ap.d2 - t * ab.d2};
  const double d = std::hypot(diff.d1, diff.d2);
  if (d == 0.0) return {0.0, {1.0, 0.0}};
  return {d, {diff.d1 / d, diff.d2 / d}};
}

}  // namespace

double tube_volume(const RectifiableSet& set, double r, int cells_per_radius) {
  const Geometry& g = set.geometry;
  if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "tube radius must be positive");
  if (cells_per_radius < 4) throw Error(ErrorCode::invalid_argument, "cells_per_radius must be at least 4");
  const double target = r / cells_per_radius;
  if (target < 1e-7 * std::max(g.extent1(), g.extent2())) {
    throw Error(ErrorCode::resolution, "tube radius below grid resolvability");
  }
  const auto n1 = static_cast<std::int64_t>(std::ceil(g.extent1() / target));
  const auto n2 = static_cast<std::int64_t>(std::ceil(g.extent2() / target));
  const double h1 = g.extent1() / n1;
  const double h2 = g.extent2() / n2;
  const bool sphere = g.kind() == GeometryKind::sphere;

  struct Cell {
    double d;
    Vec2 dir;
  };
  std::unordered_map<std::uint64_t, Cell> cells;
  std::size_t visits = 0;

  auto cover = [&](Point lo, Point hi, auto&& dist) {
    std::int64_t i0 = static_cast<std::int64_t>(std::floor((lo.x1 - g.origin().x1) / h1));
    std::int64_t i1 = static_cast<std::int64_t>(std::floor((hi.x1 - g.origin().x1) / h1));
    std::int64_t j0 = static_cast<std::int64_t>(std::floor((lo.x2 - g.origin().x2) / h2));
    std::int64_t j1 = static_cast<std::int64_t>(std::floor((hi.x2 - g.origin().x2) / h2));
    if (!g.periodic1()) {
      i0 = std::max<std::int64_t>(i0, 0);
      i1 = std::min<std::int64_t>(i1, n1 - 1);
    } else if (i1 - i0 >= n1) {
      i0 = 0;
      i1 = n1 - 1;
    }
    if (!g.periodic2()) {
      j0 = std::max<std::int64_t>(j0, 0);
      j1 = std::min<std::int64_t>(j1, n2 - 1);
    } else if (j1 - j0 >= n2) {
      j0 = 0;
      j1 = n2 - 1;
    }
    visits += static_cast<std::size_t>(std::max<std::int64_t>(0, i1 - i0 + 1)) *
              static_cast<std::size_t>(std::max<std::int64_t>(0, j1 - j0 + 1));
    if (visits > 400'000'000) throw Error(ErrorCode::resolution, "tube grid too large for this radius");
    for (std::int64_t i = i0; i <= i1; ++i) {
      const std::int64_t wi = ((i % n1) + n1) % n1;
      for (std::int64_t j = j0; j <= j1; ++j) {
        const std::int64_t wj = ((j % n2) + n2) % n2;
        const Point c{g.origin().x1 + (wi + 0.5) * h1, g.origin().x2 + (wj + 0.5) * h2};
        const Nearest near = dist(c);
        if (near.distance > r + 2.0 * std::max(h1, h2)) continue;
        const std::uint64_t key = static_cast<std::uint64_t>(wi) * static_cast<std::uint64_t>(n2) +
                                  static_cast<std::uint64_t>(wj);
        auto [it, inserted] = cells.try_emplace(key, Cell{near.distance, near.direction});
        if (!inserted && near.distance < it->second.d) it->second = Cell{near.distance, near.direction};
      }
    }
  };

  // Chart-space half-widths of the r-neighbourhood around a point.
  auto reach = [&](Point p) -> std::pair<double, double> {
    if (!sphere) return {r, r};
    const double lat_lo = std::max(1e-3, std::min(std::sin(std::max(0.0, p.x1 - r)), std::sin(std::min(std::numbers::pi, p.x1 + r))));
    const bool near_pole = p.x1 - r <= 0.0 || p.x1 + r >= std::numbers::pi;
    return {r, near_pole ? 4.0 * std::numbers::pi : r / lat_lo};
  };

  for (std::size_t k = 0; k < set.polylines.size(); ++k) {
    const auto& v = set.polylines[k];
    const bool closed = k < set.closed.size() && set.closed[k];
    const std::size_t nseg = v.size() < 2 ? 0 : (closed ? v.size() : v.size() - 1);
    for (std::size_t s = 0; s < nseg; ++s) {
      const Point a = v[s];
      const Point b0 = v[(s + 1) % v.size()];
      const Vec2 ab = g.displacement(a, b0);
      const Point b{a.x1 + ab.d1, a.x2 + ab.d2};
      const auto [ra1, ra2] = reach(a);
      const auto [rb1, rb2] = reach(b);
      const double e1 = std::max(ra1, rb1) + h1;
      const double e2 = std::max(ra2, rb2) + h2;
      cover({std::min(a.x1, b.x1) - e1, std::min(a.x2, b.x2) - e2},
            {std::max(a.x1, b.x1) + e1, std::max(a.x2, b.x2) + e2},
            [&](Point c) { return distance_to_segment(g, c, a, b0); });
    }
  }
  std::vector<Point> points = set.points;
  for (const auto& v : set.polylines) {
    if (v.size() == 1) points.push_back(v.front());
  }
  for (const Point& p : points) {
    const auto [e1, e2] = reach(p);
    cover({p.x1 - e1 - h1, p.x2 - e2 - h2}, {p.x1 + e1 + h1, p.x2 + e2 + h2}, [&](Point c) {
      const Vec2 d = g.displacement(p, c);
      const double dist = g.distance(p, c);
      const double dn = std::hypot(d.d1, d.d2);
      return Nearest{dist, dn > 0 ? Vec2{d.d1 / dn, d.d2 / dn} : Vec2{1.0, 0.0}};
    });
  }

  double area = 0.0;
  for (const auto& [key, cell] : cells) {
    const auto i = static_cast<std::int64_t>(key / static_cast<std::uint64_t>(n2));
    double w;
    if (sphere) {
      w = (std::cos(i * h1) - std::cos((i + 1) * h1)) * h2;
    } else {
      w = h1 * h2;
    }
    // Width of the cell measured along the distance gradient.
    const double width = sphere ? h1 : std::abs(cell.dir.d1) * h1 + std::abs(cell.dir.d2) * h2;
    const double frac = std::clamp(0.5 + (r - cell.d) / width, 0.0, 1.0);
    area += w * frac;
  }
  return area;
}

double symmetric_difference_area(const ScalarField& f, const ScalarField& g, int resolution) {
  if (!(f.geometry() == g.geometry())) throw Error(ErrorCode::invalid_argument, "fields on different geometries");
  if (resolution < 64) throw Error(ErrorCode::resolution, "symmetric difference needs resolution >= 64");
  AreaGrid grid(f.geometry(), resolution);
  const int m1 = grid.corners1();
  const int m2 = grid.corners2();
  std::vector<double> vf(static_cast<std::size_t>(m1) * m2), vg(vf.size());
  for (int i = 0; i < m1; ++i) {
    for (int j = 0; j < m2; ++j) {
      const Point p = grid.corner(i, j);
      vf[grid.corner_index(i, j)] = f.value(p);
      vg[grid.corner_index(i, j)] = g.value(p);
    }
  }
  constexpr int kSub = 8;
  double area = 0.0;
  for (int i = 0; i < grid.cells1(); ++i) {
    for (int j = 0; j < grid.cells2(); ++j) {
      const std::array<std::size_t, 4> idx{grid.corner_index(i, j), grid.corner_index(i + 1, j),
                                           grid.corner_index(i + 1, j + 1), grid.corner_index(i, j + 1)};
      std::array<double, 4> a{}, b{};
      int pf = 0, pg = 0;
      for (int k = 0; k < 4; ++k) {
        a[k] = vf[idx[k]];
        b[k] = vg[idx[k]];
        pf += a[k] >= 0.0;
        pg += b[k] >= 0.0;
      }
      const double w = grid.cell_area(i, j);
      const bool uniform = (pf == 0 || pf == 4) && (pg == 0 || pg == 4);
      if (uniform) {
        if ((pf == 4) != (pg == 4)) area += w;
        continue;
      }
      // Along each sample row both interpolants are linear in u, so the
      // disagreement set is a union of intervals measured exactly.
      double measure = 0.0;
      for (int t = 0; t < kSub; ++t) {
        const double v = (t + 0.5) / kSub;
        const double f0 = (1 - v) * a[0] + v * a[3], f1 = (1 - v) * a[1] + v * a[2];
        const double g0 = (1 - v) * b[0] + v * b[3], g1 = (1 - v) * b[1] + v * b[2];
        std::array<double, 4> cuts{0.0, 1.0, 0.0, 0.0};
        int n = 2;
        if ((f0 < 0.0) != (f1 < 0.0)) cuts[n++] = f0 / (f0 - f1);
        if ((g0 < 0.0) != (g1 < 0.0)) cuts[n++] = g0 / (g0 - g1);
        std::sort(cuts.begin(), cuts.begin() + n);
        for (int k = 0; k + 1 < n; ++k) {
          const double u = 0.5 * (cuts[k] + cuts[k + 1]);
          const double fa = (1 - u) * f0 + u * f1;
          const double ga = (1 - u) * g0 + u * g1;
          if ((fa >= 0.0) != (ga >= 0.0)) measure += cuts[k + 1] - cuts[k];
        }
      }
      area += w * measure / kSub;
    }
  }
  return area;
}

}  // namespace nodalab
