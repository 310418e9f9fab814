#include "nodalab/scenario.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>

#include "nodalab/eigenbasis.h"
#include "nodalab/error.h"
#include "nodalab/expression.h"
#include "nodalab/grid.h"
#include "nodalab/heatflow.h"
#include "nodalab/nodal_geometry.h"
#include "nodalab/root_tracking.h"
#include "nodalab/svg.h"
#include "nodalab/sweepout.h"

namespace nodalab {

namespace {

using json = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

// Infinite values are not representable in JSON; write them as strings.
json real(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json reals(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(real(x));
  return a;
}

std::string csv_number(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

class Stopwatch {
 public:
  explicit Stopwatch(json& sink) : sink_(sink) {}
  template <class F>
  auto time(const std::string& stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record(stage, t0);
    } else {
      auto r = f();
      record(stage, t0);
      return r;
    }
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point t0) {
    sink_[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  json& sink_;
};

struct Context {
  const ScenarioConfig& cfg;
  const RunOptions& opts;
  RunResult& run;
  json& results;
  Stopwatch clock;

  void write(const std::string& name, const std::string& content) {
    run.files.push_back(name);
    if (opts.out_dir.empty()) return;
    std::ofstream out(opts.out_dir / name, std::ios::binary);
    out << content;
    if (!out) throw Error(ErrorCode::invalid_argument, "cannot write " + (opts.out_dir / name).string());
  }

  void write_csv(const std::string& name, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream os;
    for (std::size_t k = 0; k < header.size(); ++k) os << (k ? "," : "") << header[k];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << r[k];
      os << '\n';
    }
    write(name, os.str());
  }
};

// Re-raises errors met while interpreting configuration values as
// config errors that name the key.
template <class F>
auto with_key(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config_error) throw;
    throw Error(ErrorCode::config_error, key + ": " + e.what());
  }
}

int positive_int(const ScenarioConfig& cfg, const std::string& key, long long min = 1) {
  const long long v = cfg.integer(key);
  if (v < min || v > 1'000'000'000) {
    throw Error(ErrorCode::config_error, key + ": must be at least " + std::to_string(min));
  }
  return static_cast<int>(v);
}

Geometry make_geometry(const ScenarioConfig& cfg) {
  return with_key("geometry", [&] {
    const GeometryKind kind = geometry_kind_from_string(cfg.string("geometry.kind"));
    if (kind == GeometryKind::sphere) {
      for (const char* key : {"geometry.side1", "geometry.side2"}) {
        if (cfg.has(key)) throw Error(ErrorCode::config_error, std::string(key) + ": the sphere has no side lengths");
      }
      return Geometry::sphere();
    }
    const double def = kind == GeometryKind::flat_torus ? 2 * kPi : kPi;
    const double a = cfg.has("geometry.side1") ? cfg.number("geometry.side1") : def;
    const double b = cfg.has("geometry.side2") ? cfg.number("geometry.side2") : def;
    if (kind == GeometryKind::flat_torus) return Geometry::torus(a, b);
    return Geometry::rectangle(a, b, cfg.number("geometry.origin1"), cfg.number("geometry.origin2"));
  });
}

SpectralBasis make_basis(const ScenarioConfig& cfg, const Geometry& g, std::size_t at_least = 0) {
  return with_key("basis.count", [&] {
    const auto n = static_cast<std::size_t>(positive_int(cfg, "basis.count"));
    return build_basis(g, std::max(n, at_least));
  });
}

json chart_json(const Geometry& g) {
  json c;
  c["kind"] = to_string(g.kind());
  c["side1"] = g.side1();
  c["side2"] = g.side2();
  c["origin1"] = g.origin().x1;
  c["origin2"] = g.origin().x2;
  return c;
}

struct FieldSpec {
  std::optional<ScalarField> field;
  std::optional<std::vector<double>> theta;
  json echo;
};

// Field from a config section: `expression` in x1, x2, or coefficients
// `theta` / `amplitudes` (raw-function weights), optionally against `modes`.
FieldSpec make_field(const ScenarioConfig& cfg, const std::string& sec, const SpectralBasis& basis) {
  const bool has_expr = cfg.has(sec + ".expression");
  const bool has_theta = cfg.has(sec + ".theta");
  const bool has_amp = cfg.has(sec + ".amplitudes");
  if (has_expr + has_theta + has_amp != 1) {
    throw Error(ErrorCode::config_error, sec + ": give exactly one of expression, theta, amplitudes");
  }
  FieldSpec spec;
  if (has_expr) {
    if (cfg.has(sec + ".modes")) throw Error(ErrorCode::config_error, sec + ".modes: not used with expression");
    const std::string text = cfg.string(sec + ".expression");
    const Expression f = with_key(sec + ".expression", [&] { return Expression::parse(text, {"x1", "x2"}); });
    const Expression d1 = f.derivative(0), d2 = f.derivative(1);
    spec.field = ScalarField(
        basis.geometry(),
        [f, d1, d2](Point p) {
          const double v[2] = {p.x1, p.x2};
          return FieldSample{f.evaluate(v), {d1.evaluate(v), d2.evaluate(v)}};
        },
        Provenance::closed_form);
    spec.echo["expression"] = text;
    return spec;
  }
  const std::string key = sec + (has_theta ? ".theta" : ".amplitudes");
  const std::vector<double>& given = cfg.numbers(key);
  std::vector<double> raw(basis.count(), 0.0);
  if (cfg.has(sec + ".modes")) {
    const auto& modes = cfg.strings(sec + ".modes");
    if (modes.size() != given.size()) {
      throw Error(ErrorCode::config_error, key + ": needs one value per entry of " + sec + ".modes");
    }
    for (std::size_t k = 0; k < modes.size(); ++k) {
      const std::size_t j = with_key(sec + ".modes", [&] { return basis.index_of(modes[k]); });
      raw[j] += given[k];
    }
  } else {
    if (given.size() > basis.count()) throw Error(ErrorCode::config_error, key + ": longer than basis.count");
    std::copy(given.begin(), given.end(), raw.begin());
  }
  std::vector<double> theta = has_theta ? raw : theta_from_amplitudes(basis, raw);
  if (std::all_of(theta.begin(), theta.end(), [](double t) { return t == 0.0; })) {
    throw Error(ErrorCode::config_error, key + ": all coefficients are zero");
  }
  spec.field = combination_field(basis, theta);
  spec.theta = theta;
  json terms = json::array();
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (theta[j] != 0.0) terms.push_back({{"mode", basis.mode(j).label()}, {"theta", theta[j]}});
  }
  spec.echo["terms"] = terms;
  return spec;
}

json curves_json(const NodalCurveSet& curves) {
  json a = json::array();
  for (const auto& c : curves.components) {
    json v = json::array();
    for (const Point& p : c.vertices) v.push_back({p.x1, p.x2});
    a.push_back({{"closed", c.closed}, {"sign_change", c.sign_change}, {"length", c.length}, {"vertices", v}});
  }
  return a;
}

void run_nodal(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const Geometry g = make_geometry(cfg);
  const SpectralBasis basis = make_basis(cfg, g);
  const FieldSpec spec = make_field(cfg, "field", basis);
  const ScalarField& f = *spec.field;
  const int res = positive_int(cfg, "nodal.resolution", 8);
  const int refine = positive_int(cfg, "nodal.max_refine", 0);

  NodalCurveSet curves = ctx.clock.time("extract", [&] { return extract_nodal(f, res, refine); });
  const MassEstimate mass = ctx.clock.time("mass", [&] { return boundary_mass(f, curves); });
  for (std::size_t k = 0; k < curves.components.size(); ++k) curves.components[k].sign_change = mass.sign_change[k];

  // Singular tolerances are relative to the field's lattice maxima.
  const NodeGrid grid(g, res);
  double fmax = 0.0, gmax = 0.0;
  for (int i = 0; i < grid.n1(); ++i) {
    for (int j = 0; j < grid.n2(); ++j) {
      const FieldSample s = f(grid.node(i, j));
      fmax = std::max(fmax, std::abs(s.value));
      gmax = std::max(gmax, g.gradient_norm(grid.node(i, j), s.gradient));
    }
  }
  const double eps_f = cfg.number("nodal.singular_eps_f") * fmax;
  const double eps_g = cfg.number("nodal.singular_eps_g") * std::max(gmax, 1e-300);
  const SingularSetEstimate sing =
      ctx.clock.time("singular", [&] { return singular_points(f, res, std::max(eps_f, 1e-300), eps_g); });

  auto& r = ctx.results;
  r["field"] = spec.echo;
  r["chart"] = chart_json(g);
  r["resolution"] = res;
  r["refine_depth"] = curves.refine_depth;
  r["grid_spacing"] = curves.grid_spacing;
  r["vertex_tolerance"] = curves.vertex_tolerance;
  r["length"] = curves.total_length();
  r["mass"] = mass.mass;
  r["length_minus_mass"] = curves.total_length() - mass.mass;
  r["components"] = curves.components.size();
  r["sign_changing_components"] = std::count(mass.sign_change.begin(), mass.sign_change.end(), true);
  r["degenerate_segments"] = mass.degenerate_segments;

  json sj;
  sj["eps_f"] = sing.eps_f;
  sj["eps_g"] = sing.eps_g;
  sj["count"] = sing.points.size();
  json pts = json::array();
  int max_order = 1;
  for (const Point& p : sing.points) {
    json e = {{"x1", p.x1}, {"x2", p.x2}};
    if (spec.theta) {
      const auto order = vanishing_order_probe(basis, *spec.theta, p, 8, 1e-6 * std::max(fmax, 1e-300));
      e["vanishing_order"] = order ? json(*order) : json(">8");
      if (order) max_order = std::max(max_order, *order);
    }
    pts.push_back(e);
  }
  sj["points"] = pts;
  r["singular"] = sj;

  const auto& radii = cfg.numbers("nodal.radii");
  if (!radii.empty()) {
    const int cg = positive_int(cfg, "nodal.center_grid", 16);
    const ConcentrationProfile prof = with_key("nodal.radii", [&] {
      return ctx.clock.time("concentration", [&] { return ball_concentration_profile(curves, radii, cg); });
    });
    json rows = json::array();
    for (std::size_t k = 0; k < radii.size(); ++k) {
      rows.push_back({{"r", radii[k]},
                      {"value", prof.values[k]},
                      {"value_over_r", prof.values[k] / radii[k]},
                      {"center", {prof.argmax_centers[k].x1, prof.argmax_centers[k].x2}}});
    }
    r["concentration"] = rows;
    if (spec.theta) r["concentration_bound"] = 4.0 * (max_order + 1);
  }

  const auto& tube_radii = cfg.numbers("nodal.tube_radii");
  if (!tube_radii.empty()) {
    const RectifiableSet set = RectifiableSet::from_curves(curves);
    json rows = json::array();
    std::vector<std::vector<std::string>> csv;
    ctx.clock.time("tube", [&] {
      for (double rad : tube_radii) {
        if (!(rad > 0.0)) throw Error(ErrorCode::config_error, "nodal.tube_radii: radii must be positive");
        const double vol = tube_volume(set, rad);
        const double target = 2.0 * set.length();
        rows.push_back({{"r", rad},
                        {"volume", vol},
                        {"volume_over_r", vol / rad},
                        {"twice_length", target},
                        {"relative_error", target > 0 ? std::abs(vol / rad - target) / target : 0.0}});
        csv.push_back({csv_number(rad), csv_number(vol), csv_number(vol / rad)});
      }
    });
    r["tube"] = rows;
    ctx.write_csv("tube.csv", {"r", "volume", "volume_over_r"}, csv);
  }

  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < curves.components.size(); ++k) {
    const auto& c = curves.components[k];
    for (std::size_t v = 0; v < c.vertices.size(); ++v) {
      rows.push_back({std::to_string(k), std::to_string(v), csv_number(c.vertices[v].x1),
                      csv_number(c.vertices[v].x2), c.sign_change ? "1" : "0"});
    }
  }
  ctx.write_csv("nodal_curves.csv", {"component", "vertex", "x1", "x2", "sign_change"}, rows);
  r["curves"] = curves_json(curves);
}

std::vector<double> mode_vector(const SpectralBasis& b, std::span<const std::string> labels) {
  std::vector<double> v;
  for (const auto& l : labels) v.push_back(static_cast<double>(b.index_of(l)));
  return v;
}

void run_sweepout(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const Geometry g = make_geometry(cfg);
  const std::string task = cfg.string("sweepout.task");
  auto& r = ctx.results;
  r["task"] = task;
  r["chart"]["kind"] = to_string(g.kind());
  if (task == "phi") {
    const int p = positive_int(cfg, "sweepout.p", 0);
    const SpectralBasis basis = make_basis(cfg, g, static_cast<std::size_t>(p) + 1);
    PhiOptions o;
    o.resolution = positive_int(cfg, "sweepout.resolution", 8);
    o.max_refine = positive_int(cfg, "sweepout.max_refine", 0);
    o.threads = ctx.opts.threads;
    const int restarts = positive_int(cfg, "sweepout.restarts");
    const WidthEstimate w =
        ctx.clock.time("phi", [&] { return estimate_phi_p(basis, p, restarts, cfg.seed(), o); });
    r["p"] = p;
    r["phi_p_lower"] = w.phi_p_lower;
    r["sup_length"] = w.sup_length;
    r["evaluations"] = w.evaluations;
    json modes = json::array();
    for (std::size_t j = 0; j <= static_cast<std::size_t>(p); ++j) modes.push_back(basis.mode(j).label());
    r["modes"] = modes;
    r["argmax_theta"] = reals(w.argmax.values());
  } else if (task == "nonconcentration") {
    const int p = positive_int(cfg, "sweepout.p", 0);
    const SpectralBasis basis = make_basis(cfg, g, static_cast<std::size_t>(p) + 1);
    const auto& radii = cfg.numbers("sweepout.radii");
    NonConcentrationOptions o;
    o.resolution = positive_int(cfg, "sweepout.resolution", 8);
    o.max_refine = positive_int(cfg, "sweepout.max_refine", 0);
    o.center_grid = positive_int(cfg, "sweepout.center_grid", 16);
    const int samples = positive_int(cfg, "sweepout.theta_samples");
    const NonConcentrationTable t = with_key("sweepout.radii", [&] {
      return ctx.clock.time("nonconcentration",
                            [&] { return sweepout_nonconcentration_check(basis, p, samples, radii, cfg.seed(), o); });
    });
    r["p"] = p;
    r["theta_samples"] = samples;
    json rows = json::array();
    std::vector<std::vector<std::string>> csv;
    bool monotone = true;
    for (std::size_t k = 0; k < radii.size(); ++k) {
      rows.push_back({{"r", radii[k]}, {"value", t.values[k]}, {"value_over_r", t.values[k] / radii[k]}});
      csv.push_back({csv_number(radii[k]), csv_number(t.values[k])});
      if (k > 0 && t.values[k] > t.values[k - 1]) monotone = false;
    }
    r["table"] = rows;
    r["decreasing_with_r"] = monotone;
    if (!radii.empty() && t.values.front() > 0) {
      r["radius_ratio"] = radii.front() / radii.back();
      r["value_ratio"] = t.values.back() / t.values.front();
    }
    ctx.write_csv("nonconcentration.csv", {"r", "value"}, csv);
  } else {
    const SpectralBasis full = make_basis(cfg, g);
    const int res = positive_int(cfg, "sweepout.resolution", 64);
    const auto& labels = cfg.strings("sweepout.path_modes");
    std::vector<std::size_t> idx;
    for (double x : with_key("sweepout.path_modes", [&] { return mode_vector(full, labels); })) {
      idx.push_back(static_cast<std::size_t>(x));
    }
    const SpectralBasis basis = full.subset(idx);
    r["path_modes"] = labels;
    json scans = json::array();
    std::vector<std::vector<std::string>> csv;
    auto scan_path = [&](const std::vector<ProjectiveCoefficients>& path, json entry) {
      const FlatScan s = with_key("sweepout.path", [&] { return flat_continuity_scan(basis, path, res); });
      entry["points"] = path.size();
      entry["max_proxy"] = s.max_proxy;
      scans.push_back(entry);
      return s.max_proxy;
    };
    ctx.clock.time("continuity", [&] {
      if (cfg.has("sweepout.path_points")) {
        std::vector<ProjectiveCoefficients> path;
        for (const auto& row : cfg.number_rows("sweepout.path_points")) {
          if (row.size() != basis.count()) {
            throw Error(ErrorCode::config_error, "sweepout.path_points: each row needs one entry per path mode");
          }
          path.push_back(with_key("sweepout.path_points", [&] { return ProjectiveCoefficients(row); }));
        }
        scan_path(path, json{{"kind", "points"}});
        return;
      }
      if (basis.count() != 2) {
        throw Error(ErrorCode::config_error, "sweepout.path_modes: the rotating path needs exactly two modes");
      }
      const double length = cfg.number("sweepout.path_length");
      for (double h : cfg.numbers("sweepout.path_steps")) {
        if (!(h > 0.0) || !(length > 0.0)) {
          throw Error(ErrorCode::config_error, "sweepout.path_steps: steps and path length must be positive");
        }
        std::vector<ProjectiveCoefficients> path;
        const int n = static_cast<int>(std::floor(length / h + 1e-9));
        for (int k = 0; k <= n; ++k) path.emplace_back(std::vector<double>{std::cos(k * h), std::sin(k * h)});
        const double m = scan_path(path, json{{"kind", "rotating"}, {"step", h}});
        scans.back()["max_proxy_over_step"] = m / h;
        csv.push_back({csv_number(h), csv_number(m)});
      }
    });
    r["scans"] = scans;
    if (!csv.empty()) ctx.write_csv("continuity.csv", {"step", "max_proxy"}, csv);
  }
}

void run_weyl(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const Geometry g = make_geometry(cfg);
  std::vector<double> ps = cfg.numbers("weyl.p_values");
  for (double p : ps) {
    if (p < 1 || p != std::floor(p)) throw Error(ErrorCode::config_error, "weyl.p_values: entries must be integers >= 1");
  }
  std::sort(ps.begin(), ps.end());
  if (ps.size() < 2 || std::adjacent_find(ps.begin(), ps.end()) != ps.end()) {
    throw Error(ErrorCode::config_error, "weyl.p_values: need at least two distinct values");
  }
  const SpectralBasis basis = make_basis(cfg, g, static_cast<std::size_t>(ps.back()) + 1);
  PhiOptions o;
  o.resolution = positive_int(cfg, "weyl.resolution", 8);
  o.max_refine = positive_int(cfg, "weyl.max_refine", 0);
  o.threads = ctx.opts.threads;
  const int restarts = positive_int(cfg, "weyl.restarts");
  std::vector<WeylPoint> pts;
  json rows = json::array();
  std::vector<double> warm;
  for (double p : ps) {
    PhiOptions po = o;
    // The previous maximiser embeds in the larger space.
    if (!warm.empty()) po.warm_starts = {warm};
    const WidthEstimate w = ctx.clock.time("phi_" + std::to_string(static_cast<int>(p)), [&] {
      return estimate_phi_p(basis, static_cast<int>(p), restarts, cfg.seed(), po);
    });
    warm.assign(w.argmax.values().begin(), w.argmax.values().end());
    pts.push_back({p, w.phi_p_lower});
    rows.push_back({{"p", static_cast<int>(p)},
                    {"phi_p_lower", w.phi_p_lower},
                    {"sup_length", w.sup_length},
                    {"evaluations", w.evaluations}});
  }
  const WeylFit fit = weyl_fit(pts);
  auto& r = ctx.results;
  r["restarts"] = restarts;
  r["estimates"] = rows;
  r["fit"] = {{"p_values", fit.p_values},
              {"sup_values", fit.sup_values},
              {"exponent", fit.exponent},
              {"constant", fit.constant},
              {"residual", fit.residual}};
  r["ratio_to_sqrt_p"] = json::array();
  std::vector<std::vector<std::string>> csv;
  for (std::size_t k = 0; k < fit.p_values.size(); ++k) {
    const double p = fit.p_values[k];
    r["ratio_to_sqrt_p"].push_back(fit.sup_values[k] / std::sqrt(p));
    csv.push_back({csv_number(p), csv_number(fit.sup_values[k]), csv_number(fit.constant * std::pow(p, fit.exponent))});
  }
  ctx.write_csv("weyl.csv", {"p", "sup_value", "fitted"}, csv);
}

void run_heat(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const Geometry g = make_geometry(cfg);
  const SpectralBasis basis = make_basis(cfg, g);
  const FieldSpec spec = make_field(cfg, "field", basis);
  if (!spec.theta) throw Error(ErrorCode::config_error, "field.expression: heat data must be an eigen-combination");
  const SpectralCoefficients coeffs(basis, *spec.theta);
  const auto& thetas = cfg.numbers("heat.thetas");
  for (double t : thetas) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::config_error, "heat.thetas: values must lie in [0, 1]");
  }
  const int res = positive_int(cfg, "heat.resolution", 8);
  const HeatNodalLimit lim = ctx.clock.time(
      "heat", [&] { return heat_nodal_limit(coeffs, thetas, res, positive_int(cfg, "heat.max_refine", 0)); });
  auto& r = ctx.results;
  r["field"] = spec.echo;
  r["leading_eigenvalue"] = leading_eigenvalue(coeffs);
  r["limit_length"] = lim.limit_length;
  json rows = json::array();
  std::vector<std::vector<std::string>> csv;
  bool monotone = true;
  for (std::size_t k = 0; k < lim.samples.size(); ++k) {
    const auto& s = lim.samples[k];
    const double rel = lim.limit_length > 0 ? std::abs(s.length - lim.limit_length) / lim.limit_length
                                            : std::abs(s.length);
    rows.push_back({{"theta", s.theta},
                    {"time", real(s.time)},
                    {"length", s.length},
                    {"relative_deviation", rel},
                    {"sup_distance", s.sup_distance}});
    csv.push_back({csv_number(s.theta), csv_number(s.time), csv_number(s.length), csv_number(s.sup_distance)});
    if (k > 0 && s.theta > lim.samples[k - 1].theta && s.sup_distance > lim.samples[k - 1].sup_distance) {
      monotone = false;
    }
  }
  r["samples"] = rows;
  r["tail_deviation"] = lim.tail_deviation;
  r["sup_distance_monotone"] = monotone;
  json ne = json::array();
  for (double eps : cfg.numbers("heat.epsilons")) {
    if (!(eps > 0.0)) throw Error(ErrorCode::config_error, "heat.epsilons: values must be positive");
    ne.push_back({{"epsilon", eps}, {"n_epsilon", real(n_epsilon(coeffs, eps))}});
  }
  r["n_epsilon"] = ne;
  ctx.write_csv("heat.csv", {"theta", "time", "length", "sup_distance"}, csv);
}

void run_roots(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const std::string task = cfg.string("roots.task");
  auto& r = ctx.results;
  r["task"] = task;
  if (task == "selection") {
    if (!cfg.has("roots.families")) throw Error(ErrorCode::config_error, "roots.families: required for selection");
    const auto& iv = cfg.numbers("roots.interval");
    if (iv.size() != 2) throw Error(ErrorCode::config_error, "roots.interval: expected [t0, t1]");
    const int samples = positive_int(cfg, "roots.samples", 2);
    const int levels = positive_int(cfg, "roots.levels", 3);
    const auto& q_grid = cfg.numbers("roots.q_grid");
    json fams = json::array();
    std::vector<std::vector<std::string>> sob_csv;
    const auto& families = cfg.string_rows("roots.families");
    for (std::size_t fi = 0; fi < families.size(); ++fi) {
      const PolynomialFamily fam = with_key("roots.families", [&] {
        return PolynomialFamily::from_strings(families[fi], iv[0], iv[1]);
      });
      const RootBranchSet b = ctx.clock.time("selection_" + std::to_string(fi),
                                             [&] { return continuous_selection(fam, samples); });
      const SobolevEstimate s =
          with_key("roots.levels", [&] { return sobolev_profile(b, q_grid, levels); });
      double vieta = 0.0;
      for (std::size_t i = 0; i < b.t.size(); ++i) {
        std::vector<Complex> roots;
        for (const auto& br : b.values) roots.push_back(br[i]);
        const auto rebuilt = poly_from_roots(roots);
        const auto a = fam.at(b.t[i]);
        double scale = 1.0;
        for (double x : a) scale = std::max(scale, std::abs(x));
        for (std::size_t k = 0; k < a.size(); ++k) vieta = std::max(vieta, std::abs(rebuilt[k] - a[k]) / scale);
      }
      json f;
      f["coefficients"] = families[fi];
      f["degree"] = fam.degree();
      f["samples"] = b.t.size();
      f["inserted"] = b.inserted;
      f["max_jump"] = b.max_jump();
      f["max_vieta_error"] = vieta;
      json entries = json::array();
      for (const auto& e : s.entries) {
        entries.push_back({{"branch", e.branch},
                           {"q", e.q},
                           {"integrals", reals(e.integrals)},
                           {"extrapolated", real(e.extrapolated)},
                           {"verdict", to_string(e.verdict)}});
        std::vector<std::string> row{std::to_string(fi), std::to_string(e.branch), csv_number(e.q)};
        for (double v : e.integrals) row.push_back(csv_number(v));
        row.push_back(to_string(e.verdict));
        sob_csv.push_back(row);
      }
      f["sobolev"] = entries;
      fams.push_back(f);
      std::vector<std::vector<std::string>> rows;
      for (std::size_t i = 0; i < b.t.size(); ++i) {
        std::vector<std::string> row{csv_number(b.t[i])};
        for (const auto& br : b.values) {
          row.push_back(csv_number(br[i].real()));
          row.push_back(csv_number(br[i].imag()));
        }
        rows.push_back(row);
      }
      std::vector<std::string> header{"t"};
      for (std::size_t j = 0; j < b.branch_count(); ++j) {
        header.push_back("re" + std::to_string(j));
        header.push_back("im" + std::to_string(j));
      }
      ctx.write_csv("branches_" + std::to_string(fi) + ".csv", header, rows);
    }
    std::vector<std::string> header{"family", "branch", "q"};
    for (int l = levels - 1; l >= 0; --l) header.push_back("level_h" + std::to_string(1 << l));
    header.push_back("verdict");
    ctx.write_csv("sobolev.csv", header, sob_csv);
    r["levels"] = levels;
    r["families"] = fams;
  } else {
    const auto& w = cfg.numbers("roots.window");
    if (w.size() != 4 || !(w[1] > w[0]) || !(w[3] > w[2])) {
      throw Error(ErrorCode::config_error, "roots.window: expected [x0, x1, y0, y1] with x1 > x0, y1 > y0");
    }
    if (!cfg.has("roots.expressions")) throw Error(ErrorCode::config_error, "roots.expressions: required");
    const int res = positive_int(cfg, "roots.resolution", 8);
    const double factor = cfg.number("roots.tol_factor");
    json checks = json::array();
    std::optional<ScalarField> first;
    for (const auto& text : cfg.strings("roots.expressions")) {
      const LocalPolynomialModel m =
          with_key("roots.expressions", [&] { return local_polynomial_model(text, w[0], w[1]); });
      const ScalarField f = planar_field(m.field, w[0], w[1], w[2], w[3]);
      if (!first) first = f;
      const GraphCoverResult g = ctx.clock.time("cover_" + text, [&] {
        const double h = NodeGrid(f.geometry(), res).spacing();
        return graph_cover_check(f, m.family, res, factor * h, positive_int(cfg, "roots.samples", 2));
      });
      json coeffs = json::array();
      for (const auto& c : m.family.coefficients) coeffs.push_back(c.to_string());
      checks.push_back({{"expression", text},
                        {"degree", m.family.degree()},
                        {"unit", m.unit.to_string()},
                        {"monic_coefficients", coeffs},
                        {"points_checked", g.points_checked},
                        {"tolerance", factor * g.grid_spacing},
                        {"max_distance", g.max_distance},
                        {"worst", {g.worst.x1, g.worst.x2}},
                        {"pass", g.pass}});
    }
    r["checks"] = checks;
    if (cfg.has("roots.control")) {
      const PolynomialFamily wrong = with_key("roots.control", [&] {
        return PolynomialFamily::from_strings(cfg.strings("roots.control"), w[0], w[1], "x");
      });
      const double h = NodeGrid(first->geometry(), res).spacing();
      const GraphCoverResult g = ctx.clock.time("control", [&] {
        return graph_cover_check(*first, wrong, res, factor * h, positive_int(cfg, "roots.samples", 2));
      });
      r["control"] = {{"expression", cfg.strings("roots.expressions").front()},
                      {"coefficients", cfg.strings("roots.control")},
                      {"max_distance", g.max_distance},
                      {"worst", {g.worst.x1, g.worst.x2}},
                      {"pass", g.pass}};
    }
  }
}

void run_almgren(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const Geometry g = make_geometry(cfg);
  const SpectralBasis basis = make_basis(cfg, g);
  const FieldSpec f0 = make_field(cfg, "f0", basis);
  const FieldSpec f1 = make_field(cfg, "f1", basis);
  std::vector<double> partition;
  if (cfg.has("almgren.partition")) {
    partition = cfg.numbers("almgren.partition");
  } else {
    const int k = positive_int(cfg, "almgren.slabs");
    for (int j = 0; j <= k; ++j) partition.push_back(2 * kPi * j / k);
  }
  const int res = positive_int(cfg, "almgren.resolution", 8);
  const AlmgrenResult a = ctx.clock.time("almgren", [&] {
    try {
      return almgren_cycle_check(*f0.field, *f1.field, partition, res);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::invalid_argument) throw;
      throw Error(ErrorCode::config_error, std::string("almgren.partition: ") + e.what());
    }
  });
  auto& r = ctx.results;
  r["f0"] = f0.echo;
  r["f1"] = f1.echo;
  r["partition"] = reals(partition);
  std::vector<double> bounds;
  for (double s : partition) bounds.push_back(almgren_bound(s));
  r["ratio_bounds"] = reals(bounds);
  r["slab_areas"] = a.slab_areas;
  r["total_area"] = a.total_area;
  r["manifold_area"] = g.area();
  r["relative_area_error"] = std::abs(a.total_area - g.area()) / g.area();
  r["max_overlap"] = a.max_overlap;
  r["excluded_area"] = a.excluded_area;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  RunResult run;
  run.timings = json::object();
  json results = json::object();
  if (!options.out_dir.empty()) std::filesystem::create_directories(options.out_dir);
  Context ctx{config, options, run, results, Stopwatch(run.timings)};
  const auto t0 = std::chrono::steady_clock::now();
  switch (config.kind()) {
    case ScenarioKind::nodal: run_nodal(ctx); break;
    case ScenarioKind::sweepout: run_sweepout(ctx); break;
    case ScenarioKind::weyl: run_weyl(ctx); break;
    case ScenarioKind::heat: run_heat(ctx); break;
    case ScenarioKind::roots: run_roots(ctx); break;
    case ScenarioKind::almgren: run_almgren(ctx); break;
  }
  run.timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json report;
  report["scenario"] = to_string(config.kind());
  report["seed"] = config.seed();
  report["version"] = kVersion;
  report["config"] = config.to_yaml();
  report["results"] = results;
  try {
    for (const auto& [name, svg] : render_plots(report)) ctx.write(name, svg);
  } catch (const Error&) {
    // Nothing plottable for this scenario.
  }
  ctx.write("config.yaml", config.to_yaml());
  run.files.push_back("report.json");
  run.files.push_back("timings.json");
  std::sort(run.files.begin(), run.files.end());
  report["files"] = run.files;
  run.report = report;
  if (!options.out_dir.empty()) {
    std::ofstream(options.out_dir / "report.json", std::ios::binary) << report.dump(2) << '\n';
    std::ofstream(options.out_dir / "timings.json", std::ios::binary) << run.timings.dump(2) << '\n';
  }
  return run;
}

}  // namespace nodalab
