#include <string>

#include "doctest.h"
#include "nodalab/config.h"
#include "nodalab/error.h"
#include "test_support.h"

using namespace nodalab;
using nodalab::testing::kPi;

namespace {

ErrorCode code_of(const std::string& text) {
  try {
    ScenarioConfig::parse(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::invalid_argument;
}

std::string message_of(const std::string& text) {
  try {
    ScenarioConfig::parse(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

const char* kNodal = R"yaml(scenario: nodal
seed: 7
geometry:
  kind: flat-torus
  side1: 2*pi
basis:
  count: 9
field:
  modes: [const, "cos(1,0)"]
  amplitudes: [1, 0.5]
nodal:
  radii: [0.4, 0.2]
)yaml";

}  // namespace

TEST_CASE("defaults are filled and values typed") {
  const ScenarioConfig c = ScenarioConfig::parse(kNodal);
  CHECK(c.kind() == ScenarioKind::nodal);
  CHECK(c.seed() == 7);
  CHECK(c.number("geometry.side1") == doctest::Approx(2 * kPi).epsilon(1e-15));
  CHECK_FALSE(c.has("geometry.side2"));
  CHECK(c.integer("basis.count") == 9);
  CHECK(c.integer("nodal.resolution") == 64);
  CHECK(c.strings("field.modes").size() == 2);
  CHECK(c.numbers("nodal.radii") == std::vector<double>{0.4, 0.2});
}

TEST_CASE("seed defaults to zero") {
  const ScenarioConfig c = ScenarioConfig::parse("scenario: weyl\n");
  CHECK(c.seed() == 0);
  CHECK(c.numbers("weyl.p_values") == std::vector<double>{5, 10, 20, 40});
}

TEST_CASE("round trip is idempotent") {
  const char* texts[] = {
      kNodal,
      "scenario: roots\nroots:\n  task: selection\n  families:\n    - [\"-t\", \"0\"]\n    - [\"-t\", \"0\", \"0\"]\n",
      "scenario: sweepout\nseed: 3\nsweepout:\n  task: continuity\n  path_points: [[1, 0], [0.9, 0.1]]\n",
      "scenario: almgren\nf0:\n  theta: [1]\nf1:\n  expression: \"cos(x1) + 0.1\"\nalmgren:\n  partition: [0, pi, 2*pi]\n",
  };
  for (const char* text : texts) {
    const ScenarioConfig a = ScenarioConfig::parse(text);
    const std::string once = a.to_yaml();
    const ScenarioConfig b = ScenarioConfig::parse(once);
    CHECK(a == b);
    CHECK(b.to_yaml() == once);
  }
}

TEST_CASE("numbers survive serialization exactly") {
  const ScenarioConfig a = ScenarioConfig::parse("scenario: heat\nheat:\n  thetas: [0.1, 1/3, pi/7]\n");
  const ScenarioConfig b = ScenarioConfig::parse(a.to_yaml());
  CHECK(b.numbers("heat.thetas")[1] == 1.0 / 3.0);
  CHECK(b.numbers("heat.thetas")[2] == kPi / 7.0);
}

TEST_CASE("unknown keys are rejected by name") {
  const std::string msg = message_of("scenario: nodal\nnodal:\n  resolutoin: 32\n");
  CHECK(code_of("scenario: nodal\nnodal:\n  resolutoin: 32\n") == ErrorCode::config_error);
  CHECK(msg.find("nodal.resolutoin") != std::string::npos);
  CHECK(message_of("scenario: nodal\nextra: 1\n").find("extra") != std::string::npos);
}

TEST_CASE("keys belong to their scenario") {
  const std::string msg = message_of("scenario: nodal\nweyl:\n  restarts: 4\n");
  CHECK(msg.find("weyl.restarts") != std::string::npos);
}

TEST_CASE("unknown geometry kind names the key") {
  const std::string text = "scenario: nodal\ngeometry:\n  kind: klein-bottle\n";
  CHECK(code_of(text) == ErrorCode::config_error);
  const std::string msg = message_of(text);
  CHECK(msg.find("geometry.kind") != std::string::npos);
  CHECK(msg.find("klein-bottle") != std::string::npos);
}

TEST_CASE("type errors and bad scenarios") {
  CHECK(code_of("scenario: nodal\nnodal:\n  resolution: 2.5\n") == ErrorCode::config_error);
  CHECK(code_of("scenario: nodal\nnodal:\n  resolution: [1]\n") == ErrorCode::config_error);
  CHECK(code_of("scenario: nodal\nseed: -1\n") == ErrorCode::config_error);
  CHECK(code_of("scenario: torus\n") == ErrorCode::config_error);
  CHECK(code_of("seed: 1\n") == ErrorCode::config_error);
  CHECK(code_of("scenario: sweepout\nsweepout:\n  task: dance\n") == ErrorCode::config_error);
  CHECK(message_of("scenario: nodal\nnodal:\n  resolution: 2*\n").find("nodal.resolution") != std::string::npos);
}

TEST_CASE("malformed YAML is a parse error") {
  CHECK(code_of("scenario: [nodal\n") == ErrorCode::parse_error);
}
