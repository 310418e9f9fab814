#include <string>

#include "doctest.h"
#include "nodalab/error.h"
#include "nodalab/svg.h"
#include "test_support.h"

using namespace nodalab;
using nodalab::testing::kPi;

namespace {

std::size_t count(const std::string& s, const std::string& what) {
  std::size_t n = 0;
  for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
  return n;
}

bool well_formed(const std::string& s) {
  return s.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0 && count(s, "<svg") == 1 &&
         s.size() >= 7 && s.compare(s.size() - 7, 7, "</svg>\n") == 0;
}

const Geometry kTorus = Geometry::torus(2 * kPi, 2 * kPi);

}  // namespace

TEST_CASE("two curves give two paths") {
  std::vector<PlotCurve> curves{
      {{{1, 0}, {1, 2 * kPi}}, false, true},
      {{{3, 0}, {3, 2 * kPi}}, false, false},
  };
  const std::string svg = nodal_svg(kTorus, curves);
  CHECK(well_formed(svg));
  CHECK(count(svg, "<path") == 2);
  CHECK(count(svg, "stroke-dasharray") == 1);
}

TEST_CASE("empty curve set is a valid document") {
  const std::string svg = nodal_svg(kTorus, {});
  CHECK(well_formed(svg));
  CHECK(count(svg, "<path") == 0);
}

TEST_CASE("weyl plot has one marker per point and one line") {
  WeylFit fit;
  fit.p_values = {5, 10, 20, 40};
  fit.sup_values = {20, 28, 36, 55};
  fit.exponent = 0.47;
  fit.constant = 9.0;
  const std::string svg = weyl_svg(fit);
  CHECK(well_formed(svg));
  CHECK(count(svg, "<circle") == 4);
  CHECK(count(svg, "<line") == 1);
}

TEST_CASE("report rendering") {
  nlohmann::ordered_json report;
  report["results"]["chart"] = {{"kind", "flat-torus"}, {"side1", 2 * kPi}, {"side2", 2 * kPi},
                                {"origin1", 0.0}, {"origin2", 0.0}};
  report["results"]["curves"] = nlohmann::ordered_json::array();
  report["results"]["curves"].push_back(
      {{"closed", true}, {"sign_change", false}, {"vertices", {{kPi, 0.0}, {kPi, 2 * kPi}}}});
  const auto files = render_plots(report);
  REQUIRE(files.size() == 1);
  CHECK(files[0].first == "nodal.svg");
  CHECK(count(files[0].second, "<path") == 1);

  nlohmann::ordered_json empty;
  empty["results"]["length"] = 1.0;
  CHECK_THROWS_AS(render_plots(empty), Error);
}
