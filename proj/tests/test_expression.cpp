#include <cmath>
#include <random>

#include "doctest.h"
#include "nodalab/error.h"
#include "nodalab/expression.h"
#include "test_support.h"

using namespace nodalab;
using nodalab::testing::kPi;

TEST_CASE("parse and evaluate with standard precedence") {
  CHECK(evaluate_constant("1 + 2*3") == 7.0);
  CHECK(evaluate_constant("2^3^2") == 512.0);
  CHECK(evaluate_constant("-2^2") == -4.0);
  CHECK(evaluate_constant("(1 - 4) / 2") == -1.5);
  CHECK(evaluate_constant("2*pi") == doctest::Approx(2 * kPi));
  CHECK(evaluate_constant("sqrt(16) + abs(-3) + exp(0) + log(1)") == 8.0);
  CHECK(evaluate_constant("1e-3 * 2") == doctest::Approx(0.002));
  const Expression e = Expression::parse("x^2 - 3*y + sin(x*y)", {"x", "y"});
  const double v[2] = {1.5, -0.5};
  CHECK(e.evaluate(v) == doctest::Approx(2.25 + 1.5 + std::sin(-0.75)));
}

TEST_CASE("parse errors name the position") {
  for (const char* bad : {"1 +", "(1 + 2", "foo(1)", "2 $ 3", "sin 1", "x", ""}) {
    try {
      evaluate_constant(bad);
      FAIL("expected parse error for " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::parse_error);
    }
  }
}

TEST_CASE("symbolic derivative matches central differences") {
  const std::vector<std::string> vars{"x", "y"};
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unif(0.2, 1.8);
  for (const char* text : {"x^3*y - y^2/x", "sin(x)*cos(y) + exp(x*y)", "sqrt(x + y^2) * log(x)",
                           "tan(x/3) - abs(y - 3)", "x^y", "(x - y)^4 / (1 + x^2)"}) {
    const Expression e = Expression::parse(text, vars);
    for (std::size_t var = 0; var < 2; ++var) {
      const Expression d = e.derivative(var);
      for (int k = 0; k < 20; ++k) {
        double p[2] = {unif(rng), unif(rng)};
        const double h = 1e-6;
        double lo[2] = {p[0], p[1]}, hi[2] = {p[0], p[1]};
        lo[var] -= h;
        hi[var] += h;
        const double fd = (e.evaluate(hi) - e.evaluate(lo)) / (2 * h);
        INFO(text << " d/d" << vars[var]);
        CHECK(d.evaluate(p) == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("printing round-trips") {
  const std::vector<std::string> vars{"x", "y"};
  for (const char* text : {"x - (y - 1)", "-x^2", "(x + y)*(x - y)/2", "2^-x", "x/(y*3)", "-(x + 1)^3"}) {
    const Expression e = Expression::parse(text, vars);
    const Expression again = Expression::parse(e.to_string(), vars);
    const double p[2] = {0.7, -1.3};
    CHECK(again.evaluate(p) == doctest::Approx(e.evaluate(p)));
  }
}

TEST_CASE("polynomial expansion in a distinguished variable") {
  const std::vector<std::string> vars{"x", "y"};
  const auto c = Expression::parse("2*(y^2 - x) + y*x*3", vars).polynomial_in(1);
  REQUIRE(c.has_value());
  REQUIRE(c->size() == 3);
  const double p[2] = {0.4, 123.0};
  CHECK((*c)[0].evaluate(p) == doctest::Approx(-0.8));
  CHECK((*c)[1].evaluate(p) == doctest::Approx(1.2));
  CHECK((*c)[2].evaluate(p) == doctest::Approx(2.0));
  for (const auto& k : *c) CHECK_FALSE(k.depends_on(1));

  const auto cube = Expression::parse("(y + x)^3 / 2", vars).polynomial_in(1);
  REQUIRE(cube->size() == 4);
  CHECK((*cube)[1].evaluate(p) == doctest::Approx(1.5 * 0.16));

  CHECK_FALSE(Expression::parse("sin(y) - x", vars).polynomial_in(1).has_value());
  CHECK_FALSE(Expression::parse("1 / y", vars).polynomial_in(1).has_value());
  CHECK_FALSE(Expression::parse("y^x", vars).polynomial_in(1).has_value());
  CHECK_FALSE(Expression::parse("y^0.5", vars).polynomial_in(1).has_value());
  CHECK(Expression::parse("sin(x) * y", vars).polynomial_in(1).has_value());
}
