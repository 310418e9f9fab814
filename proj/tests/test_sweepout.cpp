#include <cmath>
#include <random>

#include "doctest.h"
#include "nodalab/error.h"
#include "nodalab/sweepout.h"
#include "test_support.h"

using namespace nodalab;
using nodalab::testing::kPi;

namespace {

const Geometry kTorus = Geometry::torus(2 * kPi, 2 * kPi);

// Mass of the sign-change set of a0 + a1 cos x1 + a2 sin x1 on the torus:
// 2 pi per simple root in x1, counted on a fine 1-D lattice.
double one_dimensional_mass(double a0, double a1, double a2) {
  const int n = 4000;
  int roots = 0;
  auto f = [&](double x) { return a0 + a1 * std::cos(x) + a2 * std::sin(x); };
  for (int k = 0; k < n; ++k) {
    const double x = 2 * kPi * k / n, y = 2 * kPi * (k + 1) / n;
    if ((f(x) < 0) != (f(y) < 0)) ++roots;
  }
  return 2 * kPi * roots;
}

// Dense sweep over the projective line / plane of raw amplitudes.
double dense_oracle(int p) {
  double best = 0.0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    const double a = kPi * k / n;
    if (p == 1) {
      best = std::max(best, one_dimensional_mass(std::cos(a), std::sin(a), 0.0));
    } else {
      // Sweep the ratio of the constant term; the cos/sin mix is a shift.
      best = std::max(best, one_dimensional_mass(std::cos(a), std::sin(a) * 0.6, std::sin(a) * 0.8));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("phi_p examples against a dense sweep") {
  const auto b = build_basis(kTorus, 5);
  CHECK(estimate_phi_p(b, 0, 4, 1).phi_p_lower == 0.0);
  const double oracle1 = dense_oracle(1);
  CHECK(oracle1 == doctest::Approx(4 * kPi).epsilon(1e-9));
  CHECK(estimate_phi_p(b, 1, 4, 1).phi_p_lower == doctest::Approx(oracle1).epsilon(0.02));
  const double oracle2 = dense_oracle(2);
  CHECK(estimate_phi_p(b, 2, 4, 1).phi_p_lower == doctest::Approx(oracle2).epsilon(0.02));
}

TEST_CASE("phi_p estimate reports mass below length and a canonical argmax") {
  const auto b = build_basis(kTorus, 12);
  const WidthEstimate w = estimate_phi_p(b, 7, 3, 9);
  CHECK(w.p == 7);
  CHECK(w.seed == 9);
  CHECK(w.argmax.size() == 8);
  CHECK(w.evaluations > 0);
  CHECK(w.phi_p_lower <= w.sup_length * 1.01);
  CHECK(w.phi_p_lower > 0.0);
  CHECK_THROWS_AS(estimate_phi_p(b, 12, 1, 0), Error);
  CHECK_THROWS_AS(estimate_phi_p(b, 3, 0, 0), Error);
}

TEST_CASE("phi_p is deterministic and independent of thread count") {
  const auto b = build_basis(kTorus, 9);
  const WidthEstimate a = estimate_phi_p(b, 8, 5, 42);
  PhiOptions threaded;
  threaded.threads = 3;
  const WidthEstimate c = estimate_phi_p(b, 8, 5, 42, threaded);
  CHECK(a.phi_p_lower == c.phi_p_lower);
  CHECK(a.argmax == c.argmax);
  CHECK(a.evaluations == c.evaluations);
  CHECK(estimate_phi_p(b, 8, 5, 42).argmax == a.argmax);
}

TEST_CASE("objective and estimate are invariant under sign and scale of theta") {
  const auto b = build_basis(kTorus, 9);
  const SweepObjective obj(b, 64);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> t(9), neg(9), big(9);
    for (std::size_t k = 0; k < 9; ++k) {
      t[k] = normal(rng);
      neg[k] = -t[k];
      big[k] = 5.0 * t[k];
    }
    CHECK(obj(t) == obj(neg));
    CHECK(obj(big) == doctest::Approx(obj(t)).epsilon(1e-12));
  }
  std::vector<double> start{0.3, -1.0, 0.2, 0.7, -0.4};
  std::vector<double> flipped, scaled;
  for (double x : start) {
    flipped.push_back(-x);
    scaled.push_back(4.0 * x);
  }
  auto run = [&](std::vector<double> w) {
    PhiOptions o;
    o.warm_starts = {std::move(w)};
    return estimate_phi_p(b, 4, 1, 3, o);
  };
  const WidthEstimate base = run(start);
  const WidthEstimate f = run(flipped);
  const WidthEstimate s = run(scaled);
  CHECK(f.argmax == base.argmax);
  CHECK(f.phi_p_lower == base.phi_p_lower);
  CHECK(s.phi_p_lower == doctest::Approx(base.phi_p_lower).epsilon(1e-9));
}

TEST_CASE("phi_p is non-decreasing in p for nested bases") {
  const auto b = build_basis(kTorus, 11);
  std::vector<double> warm;
  double prev = 0.0;
  for (int p = 0; p <= 10; ++p) {
    PhiOptions o;
    if (!warm.empty()) o.warm_starts = {warm};
    const WidthEstimate w = estimate_phi_p(b, p, 4, 17, o);
    INFO("p = " << p);
    CHECK(w.phi_p_lower >= prev * 0.99);
    prev = std::max(prev, w.phi_p_lower);
    warm.assign(w.argmax.values().begin(), w.argmax.values().end());
  }
}

TEST_CASE("weyl fit examples") {
  const std::vector<WeylPoint> two{{4, 2}, {16, 4}};
  const WeylFit f = weyl_fit(two);
  CHECK(f.exponent == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(f.constant == doctest::Approx(1.0));
  CHECK(f.residual == doctest::Approx(0.0).scale(1));

  const std::vector<WeylPoint> flat{{1, 3}, {2, 3}, {7, 3}};
  CHECK(weyl_fit(flat).exponent == doctest::Approx(0.0).scale(1));
  CHECK(weyl_fit(flat).constant == doctest::Approx(3.0));

  CHECK_THROWS_AS(weyl_fit(std::vector<WeylPoint>{{4, 2}}), Error);
  CHECK_THROWS_AS(weyl_fit(std::vector<WeylPoint>{{4, 2}, {4, 3}}), Error);
  CHECK_THROWS_AS(weyl_fit(std::vector<WeylPoint>{{4, 2}, {5, 0}}), Error);
}

TEST_CASE("non-concentration examples") {
  const auto b = build_basis(kTorus, 5);
  const std::vector<double> r02{0.2};
  const NonConcentrationTable two_circles = sweepout_nonconcentration_check(b, 1, 16, r02, 7);
  CHECK(two_circles.values[0] <= 4 * 0.2 * 1.05);
  CHECK(two_circles.values[0] > 0.0);

  const std::size_t sin_index = b.index_of("sin(1,0)");
  const auto single = b.subset(std::span<const std::size_t>(&sin_index, 1));
  const std::vector<double> radii{0.5, 0.3, 0.2, 0.1};
  const NonConcentrationTable line = sweepout_nonconcentration_check(single, 0, 3, radii, 1);
  for (std::size_t k = 0; k < radii.size(); ++k) CHECK(line.values[k] == doctest::Approx(2 * radii[k]).epsilon(0.02));

  const std::vector<double> span4{0.4, 0.2, 0.1};
  const NonConcentrationTable t = sweepout_nonconcentration_check(b, 1, 16, span4, 3);
  CHECK(t.values[1] <= t.values[0]);
  CHECK(t.values[2] <= t.values[1]);
  CHECK(t.values[2] < 0.5 * t.values[0] * 1.1);
}

TEST_CASE("flat continuity along a rotating cosine") {
  const auto b = build_basis(kTorus, 3);
  const std::size_t idx[] = {b.index_of("cos(1,0)"), b.index_of("sin(1,0)")};
  const auto pair = b.subset(idx);
  auto rotating = [](double h) {
    std::vector<ProjectiveCoefficients> path;
    for (int k = 0; k * h <= kPi + 1e-12; ++k) path.emplace_back(std::vector<double>{std::cos(k * h), std::sin(k * h)});
    return path;
  };
  const std::vector<ProjectiveCoefficients> still(4, ProjectiveCoefficients({1.0, 0.5}));
  CHECK(flat_continuity_scan(pair, still, 128).max_proxy == 0.0);

  const double m1 = flat_continuity_scan(pair, rotating(0.05), 128).max_proxy;
  CHECK(m1 == doctest::Approx(4 * kPi * 0.05).epsilon(0.01));
  // Steps finer than the grid spacing still resolve.
  const double m2 = flat_continuity_scan(pair, rotating(0.025), 128).max_proxy;
  CHECK(m2 == doctest::Approx(4 * kPi * 0.025).epsilon(0.01));
  const double m3 = flat_continuity_scan(pair, rotating(0.01), 64).max_proxy;
  CHECK(m3 == doctest::Approx(4 * kPi * 0.01).epsilon(0.02));
  CHECK_THROWS_AS(flat_continuity_scan(pair, std::span(still).first(1), 128), Error);
}

TEST_CASE("almgren slabs tile the torus") {
  const auto b = build_basis(kTorus, 2);
  const ScalarField f0 = combination_field(b, {1.0, 0.0});
  const ScalarField f1 = combination_field(b, {0.0, 1.0});
  const double area = 4 * kPi * kPi;

  const std::vector<double> k4{0, kPi / 2, kPi, 3 * kPi / 2, 2 * kPi};
  const AlmgrenResult r = almgren_cycle_check(f0, f1, k4, 128);
  CHECK(r.total_area == doctest::Approx(area).epsilon(0.01));
  CHECK(r.max_overlap < 0.005 * area);
  CHECK(r.max_overlap == 0.0);
  // Slabs of sqrt(2) cos x1 between -inf, -1, 0, 1, +inf.
  // Each slab is a band of x1-width pi / 2.
  for (double a : r.slab_areas) CHECK(a == doctest::Approx(kPi * kPi).epsilon(0.02));

  const std::vector<double> k1{0, 2 * kPi};
  CHECK(almgren_cycle_check(f0, f1, k1, 128).total_area == doctest::Approx(area).epsilon(0.01));

  CHECK(almgren_bound(0.0) == -std::numeric_limits<double>::infinity());
  CHECK(almgren_bound(kPi) == doctest::Approx(0.0).scale(1));
  CHECK(almgren_bound(kPi / 2) == doctest::Approx(-1.0));
  CHECK(almgren_bound(2 * kPi) == std::numeric_limits<double>::infinity());

  const ScalarField zero(kTorus, [](Point) { return FieldSample{}; }, Provenance::closed_form);
  try {
    almgren_cycle_check(zero, f1, k4, 64);
    FAIL("expected degenerate-denominator");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_denominator);
  }
}
