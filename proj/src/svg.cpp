#include "nodalab/svg.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "nodalab/error.h"

namespace nodalab {

namespace {

std::string num(double v) {
  char buf[32];
  // Fixed precision keeps documents small and stable.
  const double r = std::round(v * 1e4) / 1e4;
  auto res = std::to_chars(buf, buf + sizeof buf, r == 0.0 ? 0.0 : r);
  return std::string(buf, res.ptr);
}

constexpr double kWidth = 640.0;
constexpr double kMargin = 20.0;

}  // namespace

std::string nodal_svg(const Geometry& g, std::span<const PlotCurve> curves) {
  const double e1 = g.extent1(), e2 = g.extent2();
  const double scale = (kWidth - 2 * kMargin) / std::max(e1, e2);
  const double w = e1 * scale + 2 * kMargin, h = e2 * scale + 2 * kMargin;
  auto px = [&](Point p) {
    // x1 to the right, x2 upwards.
    return num(kMargin + (p.x1 - g.origin().x1) * scale) + " " + num(h - kMargin - (p.x2 - g.origin().x2) * scale);
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" viewBox=\"0 0 " << num(w) << " " << num(h) << "\">\n";
  os << "<rect x=\"" << num(kMargin) << "\" y=\"" << num(kMargin) << "\" width=\"" << num(e1 * scale)
     << "\" height=\"" << num(e2 * scale) << "\" fill=\"white\" stroke=\"#888\"/>\n";
  for (const auto& c : curves) {
    if (c.vertices.empty()) continue;
    std::string d = "M " + px(c.vertices[0]);
    auto jump = [&](Point a, Point b) { return std::abs(b.x1 - a.x1) > 0.5 * e1 || std::abs(b.x2 - a.x2) > 0.5 * e2; };
    for (std::size_t k = 1; k < c.vertices.size(); ++k) {
      d += (jump(c.vertices[k - 1], c.vertices[k]) ? " M " : " L ") + px(c.vertices[k]);
    }
    if (c.closed && c.vertices.size() > 2 && !jump(c.vertices.back(), c.vertices.front())) d += " Z";
    os << "<path d=\"" << d << "\" fill=\"none\" "
       << (c.sign_change ? "stroke=\"#1f4e9c\" stroke-width=\"1.5\"" : "stroke=\"#c0392b\" stroke-width=\"1.5\" stroke-dasharray=\"4 3\"")
       << "/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string nodal_svg(const NodalCurveSet& curves) {
  std::vector<PlotCurve> plot;
  for (const auto& c : curves.components) plot.push_back({c.vertices, c.closed, c.sign_change});
  return nodal_svg(curves.geometry, plot);
}

std::string weyl_svg(const WeylFit& fit) {
  if (fit.p_values.empty()) throw Error(ErrorCode::invalid_argument, "fit has no points");
  const double height = 480.0, pad = 50.0;
  auto [pmin, pmax] = std::minmax_element(fit.p_values.begin(), fit.p_values.end());
  auto [vmin, vmax] = std::minmax_element(fit.sup_values.begin(), fit.sup_values.end());
  double lx0 = std::log(*pmin), lx1 = std::log(*pmax);
  double ly0 = std::min(std::log(*vmin), std::log(fit.constant) + fit.exponent * lx0);
  double ly1 = std::max(std::log(*vmax), std::log(fit.constant) + fit.exponent * lx1);
  if (lx1 - lx0 < 1e-9) lx1 = lx0 + 1.0;
  if (ly1 - ly0 < 1e-9) ly1 = ly0 + 1.0;
  const double mx = 0.05 * (lx1 - lx0), my = 0.05 * (ly1 - ly0);
  lx0 -= mx, lx1 += mx, ly0 -= my, ly1 += my;
  auto sx = [&](double lx) { return pad + (lx - lx0) / (lx1 - lx0) * (kWidth - 2 * pad); };
  auto sy = [&](double ly) { return height - pad - (ly - ly0) / (ly1 - ly0) * (height - 2 * pad); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(height)
     << "\" viewBox=\"0 0 " << num(kWidth) << " " << num(height) << "\">\n";
  os << "<rect x=\"" << num(pad) << "\" y=\"" << num(pad) << "\" width=\"" << num(kWidth - 2 * pad) << "\" height=\""
     << num(height - 2 * pad) << "\" fill=\"white\" stroke=\"#888\"/>\n";
  os << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(height - 12) << "\" text-anchor=\"middle\">log p</text>\n";
  os << "<text x=\"14\" y=\"" << num(height / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
     << num(height / 2) << ")\">log sup mass</text>\n";
  os << "<text x=\"" << num(pad + 8) << "\" y=\"" << num(pad + 18) << "\">exponent " << num(fit.exponent)
     << "</text>\n";
  const double a = std::log(fit.constant);
  os << "<line x1=\"" << num(sx(lx0)) << "\" y1=\"" << num(sy(a + fit.exponent * lx0)) << "\" x2=\"" << num(sx(lx1))
     << "\" y2=\"" << num(sy(a + fit.exponent * lx1)) << "\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>\n";
  for (std::size_t k = 0; k < fit.p_values.size(); ++k) {
    os << "<circle cx=\"" << num(sx(std::log(fit.p_values[k]))) << "\" cy=\"" << num(sy(std::log(fit.sup_values[k])))
       << "\" r=\"4\" fill=\"#1f4e9c\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::pair<std::string, std::string>> render_plots(const nlohmann::ordered_json& report) {
  std::vector<std::pair<std::string, std::string>> out;
  const auto& results = report.value("results", nlohmann::ordered_json::object());
  if (results.contains("curves") && results.contains("chart")) {
    const auto& chart = results["chart"];
    const GeometryKind kind = geometry_kind_from_string(chart.at("kind").get<std::string>());
    Geometry g = kind == GeometryKind::sphere ? Geometry::sphere()
                 : kind == GeometryKind::flat_torus
                     ? Geometry::torus(chart.at("side1").get<double>(), chart.at("side2").get<double>())
                     : Geometry::rectangle(chart.at("side1").get<double>(), chart.at("side2").get<double>(),
                                           chart.at("origin1").get<double>(), chart.at("origin2").get<double>());
    std::vector<PlotCurve> curves;
    for (const auto& c : results["curves"]) {
      PlotCurve pc;
      pc.closed = c.at("closed").get<bool>();
      pc.sign_change = c.at("sign_change").get<bool>();
      for (const auto& v : c.at("vertices")) pc.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
      curves.push_back(std::move(pc));
    }
    out.emplace_back("nodal.svg", nodal_svg(g, curves));
  }
  if (results.contains("fit")) {
    const auto& f = results["fit"];
    WeylFit fit;
    fit.p_values = f.at("p_values").get<std::vector<double>>();
    fit.sup_values = f.at("sup_values").get<std::vector<double>>();
    fit.exponent = f.at("exponent").get<double>();
    fit.constant = f.at("constant").get<double>();
    out.emplace_back("weyl.svg", weyl_svg(fit));
  }
  if (out.empty()) throw Error(ErrorCode::invalid_argument, "report has no plottable content");
  return out;
}

}  // namespace nodalab
