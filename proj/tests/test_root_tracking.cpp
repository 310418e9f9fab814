#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "nodalab/assignment.h"
#include "nodalab/error.h"
#include "nodalab/root_tracking.h"
#include "test_support.h"

using namespace nodalab;

namespace {

PolynomialFamily family(std::vector<std::string> coeffs, double t0, double t1) {
  return PolynomialFamily::from_strings(coeffs, t0, t1);
}

double vieta_error(const PolynomialFamily& f, const RootBranchSet& b, std::size_t i) {
  std::vector<Complex> roots;
  for (const auto& branch : b.values) roots.push_back(branch[i]);
  const auto rebuilt = poly_from_roots(roots);
  const auto a = f.at(b.t[i]);
  double scale = 1.0, err = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  for (std::size_t k = 0; k < a.size(); ++k) err = std::max(err, std::abs(rebuilt[k] - a[k]));
  return err / scale;
}

}  // namespace

TEST_CASE("assignment agrees with brute force") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unif(0.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 6;
    std::vector<double> cost(n * n);
    for (auto& c : cost) c = trial % 3 == 0 ? std::floor(unif(rng) / 3) : unif(rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += cost[i * n + perm[i]];
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const auto got = min_cost_assignment(cost, n);
    std::vector<bool> seen(n, false);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      REQUIRE(got[i] < n);
      CHECK_FALSE(seen[got[i]]);
      seen[got[i]] = true;
      s += cost[i * n + got[i]];
    }
    CHECK(s == doctest::Approx(best));
  }
  CHECK_THROWS_AS(min_cost_assignment({1.0, 2.0}, 2), Error);
}

TEST_CASE("roots_at examples") {
  auto real = [](std::vector<double> a) { return roots_at(std::span<const double>(a)); };
  auto r = real({-1, 0, 1});
  CHECK(r[0].real() == doctest::Approx(-1.0));
  CHECK(r[1].real() == doctest::Approx(1.0));
  r = real({0, 0, 1});
  CHECK(std::abs(r[0]) == 0.0);
  CHECK(std::abs(r[1]) == 0.0);
  r = real({-4, 0, 1});
  CHECK(r[0].real() == doctest::Approx(-2.0));
  CHECK(r[1].real() == doctest::Approx(2.0));
  CHECK(real({3, 1})[0].real() == -3.0);
  try {
    real({1, 0, 2});
    FAIL("expected non-monic");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_monic);
  }
}

TEST_CASE("roots reproduce their polynomial") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t q = 1 + trial % 8;
    std::vector<Complex> chosen(q);
    for (auto& z : chosen) z = trial % 2 ? Complex(normal(rng), normal(rng)) : Complex(normal(rng), 0.0);
    if (q > 2 && trial % 5 == 0) chosen[1] = chosen[0];  // double root
    const auto a = poly_from_roots(chosen);
    const auto r = roots_at(std::span<const Complex>(a));
    REQUIRE(r.size() == q);
    const auto back = poly_from_roots(r);
    double scale = 1.0;
    for (const auto& c : a) scale = std::max(scale, std::abs(c));
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(back[k] - a[k]) <= 1e-8 * scale);
    for (const auto& z : r) {
      Complex v = 0.0;
      for (std::size_t k = a.size(); k-- > 0;) v = v * z + a[k];
      CHECK(std::abs(v) <= 1e-8 * scale);
    }
    CHECK(std::is_sorted(r.begin(), r.end(), [](Complex x, Complex y) {
      return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    }));
  }
}

TEST_CASE("continuous selection examples") {
  const auto sq = continuous_selection(family({"-t", "0"}, 0, 1), 257);
  REQUIRE(sq.branch_count() == 2);
  for (const auto& branch : sq.values) {
    const double sign = branch.back().real() > 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < sq.t.size(); ++i) CHECK(std::abs(branch[i] - sign * std::sqrt(sq.t[i])) < 1e-7);
  }

  const auto im = continuous_selection(family({"t", "0"}, 0, 1), 257);
  for (const auto& branch : im.values) {
    const double sign = branch.back().imag() > 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < im.t.size(); ++i) {
      CHECK(std::abs(branch[i] - Complex(0.0, sign * std::sqrt(im.t[i]))) < 1e-7);
    }
  }

  const PolynomialFamily cross = family({"-t^2", "0"}, -1, 1);
  const auto x = continuous_selection(cross, 201);
  for (std::size_t i = 0; i < x.t.size(); ++i) {
    std::vector<double> got{x.values[0][i].real(), x.values[1][i].real()};
    std::sort(got.begin(), got.end());
    CHECK(got[0] == doctest::Approx(-std::abs(x.t[i])).scale(1));
    CHECK(got[1] == doctest::Approx(std::abs(x.t[i])).scale(1));
  }
  const double h = 2.0 / 200;
  CHECK(x.max_jump() <= 10 * 2 * std::sqrt(2 * h * h));
  CHECK(x.inserted == 0);
  CHECK_THROWS_AS(continuous_selection(cross, 1), Error);
}

TEST_CASE("branch values reproduce coefficients at every sample") {
  for (const PolynomialFamily& f :
       {family({"-t", "0"}, 0, 1), family({"-t", "0", "0"}, 0, 1), family({"t^2 - 0.25", "sin(5*t)", "-t"}, -1, 1),
        family({"(t - 0.5)^3", "3*(t - 0.5)^2", "3*(t - 0.5)"}, 0, 1), family({"1", "0", "0", "0"}, 0, 2)}) {
    const auto b = continuous_selection(f, 301);
    for (std::size_t i = 0; i < b.t.size(); ++i) CHECK(vieta_error(f, b, i) <= 1e-8);
  }
}

TEST_CASE("selection jumps obey the Hoelder bound calibrated on X^Q - t") {
  for (int q : {2, 3}) {
    const int samples = 401;
    const double h = 1.0 / (samples - 1);
    std::vector<std::string> model(q, "0");
    model[0] = "-t";
    const double c = continuous_selection(family(model, 0, 1), samples).max_jump() / std::pow(h, 1.0 / q);
    std::vector<std::string> other(q, "0");
    other[0] = "-(t - 0.3)*(t - 0.7)/2";
    if (q == 3) other[1] = "0.1*sin(4*t)";
    const auto b = continuous_selection(family(other, 0, 1), samples);
    CHECK(b.max_jump() <= c * std::pow(h, 1.0 / q));
  }
}

TEST_CASE("sobolev profile examples") {
  const auto sq = continuous_selection(family({"-t", "0"}, 0, 1), 4097);
  const std::vector<double> qs{1.5, 2.5};
  const SobolevEstimate s = sobolev_profile(sq, qs, 3);
  for (std::size_t b = 0; b < 2; ++b) {
    const SobolevEntry& e = s.entry(b, 1.5);
    CHECK(e.integrals.back() == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
    CHECK(e.verdict == Verdict::converged);
    const SobolevEntry& d = s.entry(b, 2.5);
    CHECK(d.verdict == Verdict::diverging);
    CHECK(d.integrals[1] >= 1.2 * d.integrals[0]);
    CHECK(d.integrals[2] >= 1.2 * d.integrals[1]);
  }

  const auto lin = continuous_selection(family({"-t"}, 0, 1), 65);
  const auto grid = default_q_grid();
  const SobolevEstimate l = sobolev_profile(lin, grid, 3);
  for (double q : grid) {
    const SobolevEntry& e = l.entry(0, q);
    CHECK(e.verdict == Verdict::converged);
    CHECK(e.integrals.back() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(e.extrapolated == doctest::Approx(1.0).epsilon(1e-9));
    for (double v : e.integrals) CHECK(v >= 0.0);
  }
  CHECK_THROWS_AS(sobolev_profile(lin, grid, 2), Error);
  CHECK_THROWS_AS(sobolev_profile(continuous_selection(family({"-t"}, 0, 1), 66), grid, 3), Error);
}

TEST_CASE("sobolev verdicts switch at the conjugate exponent of y^q - x") {
  const auto grid = default_q_grid();
  for (int q : {2, 3}) {
    std::vector<std::string> coeffs(q, "0");
    coeffs[0] = "-t";
    const auto b = continuous_selection(family(coeffs, 0, 1), 4097);
    const SobolevEstimate s = sobolev_profile(b, grid, 3);
    const double threshold = q / (q - 1.0);
    for (std::size_t branch = 0; branch < b.branch_count(); ++branch) {
      for (double qp : grid) {
        if (qp == threshold) continue;
        INFO("q = " << q << ", q' = " << qp << ", branch " << branch);
        CHECK(s.entry(branch, qp).verdict == (qp < threshold ? Verdict::converged : Verdict::diverging));
      }
    }
  }
}

TEST_CASE("local polynomial model examples") {
  const auto a = local_polynomial_model("y^2 - x", 0, 1);
  REQUIRE(a.family.degree() == 2);
  CHECK(a.family.at(0.3)[0] == doctest::Approx(-0.3));
  CHECK(a.family.at(0.3)[1] == 0.0);
  const double p[2] = {0.5, 0};
  CHECK(a.unit.evaluate(p) == 1.0);

  const auto b = local_polynomial_model("2*(y^2 - x)", 0, 1);
  REQUIRE(b.family.degree() == 2);
  CHECK(b.family.at(0.3) == a.family.at(0.3));
  CHECK(b.unit.evaluate(p) == 2.0);

  const auto c = local_polynomial_model("y^3 - x", 0, 1);
  REQUIRE(c.family.degree() == 3);
  CHECK(c.family.at(0.7)[0] == doctest::Approx(-0.7));

  for (const char* bad : {"sin(y) - x", "x*y^2 - 1", "y^2 - y^2 + x", "exp(x)"}) {
    try {
      local_polynomial_model(bad, -1, 1);
      FAIL("expected not-in-prepared-form for " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::not_in_prepared_form);
    }
  }
  // A top coefficient that keeps its sign on the window is a unit.
  CHECK(local_polynomial_model("x*y^2 - 1", 0.5, 1).family.degree() == 2);
}

TEST_CASE("graph cover examples") {
  const int res = 128;
  const auto sq = local_polynomial_model("y^2 - x", 0, 1);
  const ScalarField f = planar_field(sq.field, 0, 1, -1, 1);
  const GraphCoverResult ok = graph_cover_check(f, sq.family, res, 1e-3);
  CHECK(ok.pass);
  CHECK(ok.points_checked > 100);

  const auto origin = local_polynomial_model("y^2 + x^2", -1, 1);
  const GraphCoverResult o = graph_cover_check(planar_field(origin.field, -1, 1, -1, 1), origin.family, res, 1e-3);
  CHECK(o.pass);
  CHECK(o.points_checked >= 1);

  const PolynomialFamily wrong = PolynomialFamily::from_strings(std::vector<std::string>{"0"}, 0, 1);
  const GraphCoverResult bad = graph_cover_check(f, wrong, res, 1e-3);
  CHECK_FALSE(bad.pass);
  CHECK(bad.max_distance == doctest::Approx(1.0).epsilon(0.03));
  CHECK(bad.worst.x1 > 0.95);
}

TEST_CASE("every prepared model covers its own nodal set") {
  for (const char* text : {"y^2 - x", "y^3 - x", "2*(y^2 - x)", "y^2 - x*y - x/4 + 0.1", "(1 + x^2)*(y^3 - y*x + 0.05)",
                           "y^2 - (x - 0.5)^2"}) {
    const auto m = local_polynomial_model(text, 0, 1);
    const ScalarField f = planar_field(m.field, 0, 1, -1, 1);
    const GraphCoverResult r = graph_cover_check(f, m.family, 128, 0.0);
    INFO(text << " max distance " << r.max_distance);
    CHECK(r.max_distance <= 10 * r.grid_spacing);
  }
}
