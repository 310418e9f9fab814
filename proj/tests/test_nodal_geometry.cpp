#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "nodalab/error.h"
#include "nodalab/nodal_geometry.h"
#include "test_support.h"

using namespace nodalab;
using nodalab::testing::kPi;

namespace {

const Geometry kTorus = Geometry::torus(2 * kPi, 2 * kPi);

ScalarField torus_amplitudes(std::vector<double> amps) {
  const auto b = build_basis(kTorus, amps.size());
  return combination_field(b, theta_from_amplitudes(b, amps));
}

ScalarField sin_mode() { return torus_amplitudes({0, 0, 1, 0, 0}); }
ScalarField one_plus_cos() { return torus_amplitudes({1, 1, 0, 0, 0}); }

ScalarField sin_sin() {
  return ScalarField(
      kTorus,
      [](Point p) {
        return FieldSample{std::sin(p.x1) * std::sin(p.x2),
                           {std::cos(p.x1) * std::sin(p.x2), std::sin(p.x1) * std::cos(p.x2)}};
      },
      Provenance::closed_form);
}

ScalarField constant_one() {
  return ScalarField(kTorus, [](Point) { return FieldSample{1.0, {0.0, 0.0}}; }, Provenance::closed_form);
}

ScalarField random_combination(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto b = build_basis(kTorus, count);
  std::vector<double> theta(count);
  for (auto& t : theta) t = normal(rng);
  return combination_field(b, theta);
}

}  // namespace

TEST_CASE("extract_nodal closed-form examples") {
  const NodalCurveSet s = extract_nodal(sin_mode(), 64, 3);
  CHECK(s.total_length() == doctest::Approx(4 * kPi).epsilon(0.01));
  CHECK(s.components.size() == 2);
  for (const auto& c : s.components) CHECK(c.closed);

  const NodalCurveSet t = extract_nodal(one_plus_cos(), 64, 3);
  CHECK(t.total_length() == doctest::Approx(2 * kPi).epsilon(0.01));
  REQUIRE(t.components.size() == 1);
  CHECK(t.components[0].closed);
  for (const Point& v : t.components[0].vertices) CHECK(std::abs(v.x1 - kPi) < 1e-3);

  const NodalCurveSet e = extract_nodal(constant_one(), 64, 3);
  CHECK(e.components.empty());
  CHECK(e.total_length() == 0.0);
}

TEST_CASE("extract_nodal on the sphere and the Dirichlet rectangle") {
  const auto sb = build_basis(Geometry::sphere(), 4);
  const std::size_t y10 = sb.index_of("Y(1,0)");
  std::vector<double> th(4, 0.0);
  th[y10] = 1.0;
  const NodalCurveSet eq = extract_nodal(combination_field(sb, th), 64, 3);
  CHECK(eq.total_length() == doctest::Approx(2 * kPi).epsilon(0.01));

  const Geometry rect = Geometry::rectangle(kPi, kPi);
  const auto rb = build_basis(rect, 3);
  std::vector<double> rt(3, 0.0);
  rt[rb.index_of("sin(2,1)")] = 1.0;
  const NodalCurveSet mid = extract_nodal(combination_field(rb, rt), 128, 3);
  // Cell-centred lattice stops half a cell short of each wall.
  CHECK(mid.total_length() == doctest::Approx(kPi).epsilon(0.02));
}

TEST_CASE("extract_nodal errors") {
  CHECK_THROWS_AS(extract_nodal(sin_mode(), 7, 0), Error);
  const ScalarField zero(kTorus, [](Point) { return FieldSample{}; }, Provenance::closed_form);
  try {
    extract_nodal(zero, 32, 0);
    FAIL("expected zero-field");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::zero_field);
  }
}

TEST_CASE("boundary mass examples") {
  const ScalarField t = one_plus_cos();
  const NodalCurveSet tc = extract_nodal(t, 64, 3);
  CHECK(boundary_mass(t, tc).mass == doctest::Approx(0.0));
  CHECK(tc.total_length() == doctest::Approx(2 * kPi).epsilon(0.01));

  const ScalarField s = sin_mode();
  CHECK(boundary_mass(s, extract_nodal(s, 64, 3)).mass == doctest::Approx(4 * kPi).epsilon(0.01));

  const ScalarField ss = sin_sin();
  CHECK(boundary_mass(ss, extract_nodal(ss, 64, 3)).mass == doctest::Approx(8 * kPi).epsilon(0.01));
}

TEST_CASE("singular point examples") {
  CHECK(singular_points(sin_mode(), 128, 1e-2, 1e-2).points.empty());

  const SingularSetEstimate cross = singular_points(sin_sin(), 128, 1e-2, 1e-2);
  REQUIRE(cross.points.size() == 4);
  const Point expected[] = {{0, 0}, {0, kPi}, {kPi, 0}, {kPi, kPi}};
  for (const Point& e : expected) {
    const bool found = std::any_of(cross.points.begin(), cross.points.end(),
                                   [&](const Point& p) { return kTorus.distance(p, e) < 1e-3; });
    CHECK(found);
  }

  const ScalarField t = one_plus_cos();
  const SingularSetEstimate circle = singular_points(t, 128, 1e-3, 1e-3);
  REQUIRE(circle.points.size() >= 16);
  std::vector<double> heights;
  for (const Point& p : circle.points) {
    CHECK(std::abs(p.x1 - kPi) < 0.05);
    const FieldSample v = t(p);
    CHECK(std::abs(v.value) <= circle.eps_f);
    CHECK(kTorus.gradient_norm(p, v.gradient) <= circle.eps_g);
    heights.push_back(p.x2);
  }
  std::sort(heights.begin(), heights.end());
  double gap = heights.front() + 2 * kPi - heights.back();
  for (std::size_t k = 1; k < heights.size(); ++k) gap = std::max(gap, heights[k] - heights[k - 1]);
  CHECK(gap < 0.5);
}

TEST_CASE("ball concentration examples") {
  const std::vector<double> radii{1.0, 0.5, 0.25, 0.1};
  const ConcentrationProfile line = ball_concentration_profile(extract_nodal(sin_mode(), 128, 3), radii, 64);
  for (std::size_t k = 0; k < radii.size(); ++k) CHECK(line.values[k] == doctest::Approx(2 * radii[k]).epsilon(0.02));

  const ConcentrationProfile cross = ball_concentration_profile(extract_nodal(sin_sin(), 128, 3), radii, 64);
  for (std::size_t k = 0; k < radii.size(); ++k) CHECK(cross.values[k] == doctest::Approx(4 * radii[k]).epsilon(0.02));
}

TEST_CASE("ball concentration is monotone under halving the radius") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const NodalCurveSet c = extract_nodal(random_combination(seed, 13), 96, 2);
    std::vector<double> radii;
    for (double r = 1.5; r > 0.02; r /= 2) radii.push_back(r);
    const ConcentrationProfile p = ball_concentration_profile(c, radii, 32);
    for (std::size_t k = 0; k < radii.size(); ++k) CHECK(p.values[k] >= 0.0);
    for (std::size_t k = 1; k < radii.size(); ++k) CHECK(p.values[k] <= p.values[k - 1] + 1e-12);
  }
}

TEST_CASE("ball concentration preconditions") {
  const NodalCurveSet c = extract_nodal(sin_mode(), 32, 0);
  CHECK_THROWS_AS(ball_concentration_profile(c, std::vector<double>{0.1, 0.2}, 32), Error);
  CHECK_THROWS_AS(ball_concentration_profile(c, std::vector<double>{0.2, 0.1}, 8), Error);
  CHECK_THROWS_AS(ball_concentration_profile(c, std::vector<double>{4.0}, 32), Error);
  CHECK_THROWS_AS(ball_concentration_profile(c, std::vector<double>{-0.1}, 32), Error);
}

TEST_CASE("length_in_ball clips chords exactly") {
  const std::vector<Point> seg{{2.0, 3.0}, {4.0, 3.0}};
  CHECK(length_in_ball(kTorus, seg, false, {3.0, 3.0}, 0.5) == doctest::Approx(1.0));
  CHECK(length_in_ball(kTorus, seg, false, {3.0, 3.3}, 0.5) == doctest::Approx(0.8));
  CHECK(length_in_ball(kTorus, seg, false, {3.0, 4.0}, 0.5) == 0.0);
  // Ball centred across the seam.
  const std::vector<Point> wrap{{6.0, 1.0}, {0.2, 1.0}};
  CHECK(length_in_ball(kTorus, wrap, false, {0.0, 1.0}, 0.1) == doctest::Approx(0.2));
}

TEST_CASE("tube volume examples") {
  RectifiableSet point{kTorus, {}, {}, {{kPi, kPi}}};
  CHECK(tube_volume(point, 0.1) == doctest::Approx(kPi * 0.01).epsilon(0.02));

  RectifiableSet seg{kTorus, {{{1.0, 1.0}, {2.0, 1.0}}}, {false}, {}};
  CHECK(tube_volume(seg, 0.05) == doctest::Approx(2 * 0.05 + kPi * 0.0025).epsilon(0.02));

  std::vector<Point> circle;
  for (int k = 0; k < 200; ++k) circle.push_back({kPi, 2 * kPi * k / 200.0});
  RectifiableSet band{kTorus, {circle}, {true}, {}};
  CHECK(band.length() == doctest::Approx(2 * kPi));
  CHECK(tube_volume(band, 0.1) == doctest::Approx(4 * kPi * 0.1).epsilon(0.02));

  CHECK_THROWS_AS(tube_volume(point, 1e-9), Error);
}

TEST_CASE("tube volume over r approaches twice the length") {
  RectifiableSet seg{kTorus, {{{1.0, 1.0}, {2.0, 1.5}, {2.5, 0.5}}}, {false}, {}};
  const double length = seg.length();
  double ratio = 0.0;
  for (double r = 0.2; r >= 0.0125; r /= 2) ratio = tube_volume(seg, r) / r;
  CHECK(ratio == doctest::Approx(2 * length).epsilon(0.05));

  const RectifiableSet nodal = RectifiableSet::from_curves(extract_nodal(random_combination(5, 9), 128, 2));
  double last = 0.0;
  for (double r = 0.1; r >= 0.0125; r /= 2) last = tube_volume(nodal, r, 8) / r;
  CHECK(last == doctest::Approx(2 * nodal.length()).epsilon(0.05));
}

TEST_CASE("symmetric difference examples") {
  const ScalarField f = sin_mode();
  CHECK(symmetric_difference_area(f, f, 128) == 0.0);

  const ScalarField g = torus_amplitudes({0.1, 0, 1, 0, 0});
  CHECK(symmetric_difference_area(f, g, 256) == doctest::Approx(4 * kPi * std::asin(0.1)).epsilon(0.005));

  const ScalarField neg = linear_combination(-1.0, f, 0.0, f);
  CHECK(symmetric_difference_area(f, neg, 128) == doctest::Approx(4 * kPi * kPi).epsilon(0.01));

  CHECK_THROWS_AS(symmetric_difference_area(f, f, 32), Error);
}

TEST_CASE("symmetric difference shrinks monotonically with the perturbation") {
  const ScalarField f = random_combination(21, 13);
  const ScalarField phi = random_combination(22, 13);
  double prev = 1e300;
  for (double delta = 0.4; delta > 1e-3; delta /= 2) {
    const double a = symmetric_difference_area(f, linear_combination(1.0, f, delta, phi), 128);
    CHECK(a <= prev);
    prev = a;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("refinement changes closed-form lengths by under half a percent") {
  for (const ScalarField& f : {sin_mode(), one_plus_cos(), sin_sin()}) {
    const double coarse = extract_nodal(f, 64, 3).total_length();
    const double fine = extract_nodal(f, 128, 3).total_length();
    CHECK(std::abs(fine - coarse) < 0.005 * fine);
  }
  CHECK(extract_nodal(constant_one(), 128, 3).total_length() == 0.0);
}

TEST_CASE("vertices lie on the zero set and mass never exceeds length") {
  for (std::uint64_t seed = 30; seed < 36; ++seed) {
    const ScalarField f = random_combination(seed, 9 + seed % 5);
    const NodalCurveSet c = extract_nodal(f, 64, 3);
    double sum = 0.0;
    for (const auto& comp : c.components) {
      sum += comp.length;
      for (const Point& v : comp.vertices) CHECK(std::abs(f.value(v)) <= c.vertex_tolerance);
    }
    CHECK(c.total_length() == doctest::Approx(sum));
    const MassEstimate m = boundary_mass(f, c);
    CHECK(m.mass <= c.total_length() + 1e-12);
    // Generic combinations have only sign-changing zeros.
    CHECK(m.mass == doctest::Approx(c.total_length()));
  }
}

TEST_CASE("ball concentration respects the vanishing-order bound") {
  std::vector<ScalarField> fields{sin_sin(), one_plus_cos(), random_combination(41, 9), random_combination(42, 13)};
  const auto basis = build_basis(kTorus, 13);
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const ScalarField& f = fields[k];
    int order = 1;
    for (const Point& p : singular_points(f, 128, 1e-3, 1e-3).points) {
      // Vanishing order from the radial Taylor profile of f around p.
      for (int m = 1; m <= 6; ++m) {
        bool vanish = true;
        for (int a = 0; a < 8 && vanish; ++a) {
          const double ang = kPi * a / 8;
          const double h = 1e-2;
          vanish = std::abs(f.value({p.x1 + h * std::cos(ang), p.x2 + h * std::sin(ang)})) < 1e-6 * std::pow(h, m - 1);
        }
        if (!vanish) break;
        order = std::max(order, m + 1);
      }
    }
    const NodalCurveSet c = extract_nodal(f, 128, 3);
    std::vector<double> radii{0.5, 0.4, 0.3, 0.2, 0.1, 0.05};
    const ConcentrationProfile p = ball_concentration_profile(c, radii, 64);
    for (std::size_t r = 0; r < radii.size(); ++r) {
      INFO("field " << k << " r " << radii[r]);
      CHECK(p.values[r] / radii[r] <= 4.0 * (order + 1));
    }
  }
}
