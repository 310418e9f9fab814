#include "nodalab/config.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>

#include "nodalab/error.h"
#include "nodalab/expression.h"

namespace nodalab {

namespace {

using K = ScenarioKind;
using T = ValueType;

struct KeyDef {
  std::string key;
  ValueType type;
  ConfigValue fallback;
  std::vector<ScenarioKind> scenarios;  // empty: every scenario
};

const std::vector<ScenarioKind> kFieldScenarios{K::nodal, K::heat};

void add_field_keys(std::vector<KeyDef>& s, const std::string& section, std::vector<ScenarioKind> scenarios) {
  s.push_back({section + ".modes", T::strings, {}, scenarios});
  s.push_back({section + ".amplitudes", T::numbers, {}, scenarios});
  s.push_back({section + ".theta", T::numbers, {}, scenarios});
  s.push_back({section + ".expression", T::string, {}, scenarios});
}

const std::vector<KeyDef>& schema() {
  static const std::vector<KeyDef> s = [] {
    const double pi = std::numbers::pi;
    std::vector<KeyDef> d{
        {"geometry.kind", T::string, std::string("flat-torus"), {}},
        {"geometry.side1", T::number, {}, {}},
        {"geometry.side2", T::number, {}, {}},
        {"geometry.origin1", T::number, 0.0, {}},
        {"geometry.origin2", T::number, 0.0, {}},
        {"basis.count", T::integer, 16.0, {}},
    };
    add_field_keys(d, "field", kFieldScenarios);
    const std::vector<KeyDef> rest{
        {"nodal.resolution", T::integer, 64.0, {K::nodal}},
        {"nodal.max_refine", T::integer, 3.0, {K::nodal}},
        {"nodal.singular_eps_f", T::number, 1e-3, {K::nodal}},
        {"nodal.singular_eps_g", T::number, 1e-3, {K::nodal}},
        {"nodal.radii", T::numbers, std::vector<double>{}, {K::nodal}},
        {"nodal.center_grid", T::integer, 64.0, {K::nodal}},
        {"nodal.tube_radii", T::numbers, std::vector<double>{}, {K::nodal}},

        {"sweepout.task", T::string, std::string("phi"), {K::sweepout}},
        {"sweepout.p", T::integer, 1.0, {K::sweepout}},
        {"sweepout.restarts", T::integer, 8.0, {K::sweepout}},
        {"sweepout.resolution", T::integer, 64.0, {K::sweepout}},
        {"sweepout.max_refine", T::integer, 2.0, {K::sweepout}},
        {"sweepout.theta_samples", T::integer, 16.0, {K::sweepout}},
        {"sweepout.radii", T::numbers, std::vector<double>{0.4, 0.2, 0.1}, {K::sweepout}},
        {"sweepout.center_grid", T::integer, 64.0, {K::sweepout}},
        {"sweepout.path_modes", T::strings, std::vector<std::string>{"cos(1,0)", "sin(1,0)"}, {K::sweepout}},
        {"sweepout.path_steps", T::numbers, std::vector<double>{0.05}, {K::sweepout}},
        {"sweepout.path_length", T::number, pi, {K::sweepout}},
        {"sweepout.path_points", T::number_rows, {}, {K::sweepout}},

        {"weyl.p_values", T::numbers, std::vector<double>{5, 10, 20, 40}, {K::weyl}},
        {"weyl.restarts", T::integer, 16.0, {K::weyl}},
        {"weyl.resolution", T::integer, 64.0, {K::weyl}},
        {"weyl.max_refine", T::integer, 2.0, {K::weyl}},

        {"heat.thetas", T::numbers, std::vector<double>{0.5, 0.75, 0.875, 0.9}, {K::heat}},
        {"heat.resolution", T::integer, 64.0, {K::heat}},
        {"heat.max_refine", T::integer, 2.0, {K::heat}},
        {"heat.epsilons", T::numbers, std::vector<double>{0.5, 1.0, 2.0}, {K::heat}},

        {"roots.task", T::string, std::string("selection"), {K::roots}},
        {"roots.families", T::string_rows, {}, {K::roots}},
        {"roots.interval", T::numbers, std::vector<double>{0.0, 1.0}, {K::roots}},
        {"roots.samples", T::integer, 4097.0, {K::roots}},
        {"roots.levels", T::integer, 3.0, {K::roots}},
        {"roots.q_grid", T::numbers, std::vector<double>{1, 1.25, 1.5, 2, 2.5, 3, 4}, {K::roots}},
        {"roots.expressions", T::strings, {}, {K::roots}},
        {"roots.window", T::numbers, std::vector<double>{0.0, 1.0, -1.0, 1.0}, {K::roots}},
        {"roots.resolution", T::integer, 128.0, {K::roots}},
        {"roots.tol_factor", T::number, 10.0, {K::roots}},
        {"roots.control", T::strings, {}, {K::roots}},

        {"almgren.partition", T::numbers, {}, {K::almgren}},
        {"almgren.slabs", T::integer, 4.0, {K::almgren}},
        {"almgren.resolution", T::integer, 128.0, {K::almgren}},
    };
    d.insert(d.end(), rest.begin(), rest.end());
    add_field_keys(d, "f0", {K::almgren});
    add_field_keys(d, "f1", {K::almgren});
    return d;
  }();
  return s;
}

const KeyDef* find_key(const std::string& key) {
  for (const auto& k : schema()) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

bool allowed(const KeyDef& def, ScenarioKind kind) {
  return def.scenarios.empty() || std::find(def.scenarios.begin(), def.scenarios.end(), kind) != def.scenarios.end();
}

[[noreturn]] void config_fail(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::config_error, key + ": " + what);
}

double to_number(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) config_fail(key, "expected a number");
  const std::string text = n.Scalar();
  double v = 0.0;
  if (YAML::convert<double>::decode(n, v) && n.Tag() != "!") return v;
  try {
    v = evaluate_constant(text);
  } catch (const Error& e) {
    config_fail(key, "expected a number or constant expression, got '" + text + "'");
  }
  if (!std::isfinite(v)) config_fail(key, "value is not finite");
  return v;
}

std::string to_text(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) config_fail(key, "expected a string");
  return n.Scalar();
}

template <class F>
auto to_list(const YAML::Node& n, const std::string& key, F item) {
  if (!n.IsSequence()) config_fail(key, "expected a list");
  std::vector<decltype(item(n, key))> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(item(n[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

ConfigValue convert(const YAML::Node& n, const KeyDef& def) {
  const std::string& key = def.key;
  switch (def.type) {
    case T::integer: {
      const double v = to_number(n, key);
      if (v != std::floor(v) || std::abs(v) > 9e15) config_fail(key, "expected an integer");
      return v;
    }
    case T::number: return to_number(n, key);
    case T::string: return to_text(n, key);
    case T::boolean: {
      bool b = false;
      if (!n.IsScalar() || !YAML::convert<bool>::decode(n, b)) config_fail(key, "expected true or false");
      return b;
    }
    case T::numbers: return to_list(n, key, to_number);
    case T::strings: return to_list(n, key, to_text);
    case T::number_rows:
      return to_list(n, key, [](const YAML::Node& r, const std::string& k) { return to_list(r, k, to_number); });
    case T::string_rows:
      return to_list(n, key, [](const YAML::Node& r, const std::string& k) { return to_list(r, k, to_text); });
  }
  return {};
}

void check_choice(const std::map<std::string, ConfigValue>& values, const std::string& key,
                  std::initializer_list<const char*> choices) {
  auto it = values.find(key);
  if (it == values.end()) return;
  const auto& v = std::get<std::string>(it->second);
  for (const char* c : choices) {
    if (v == c) return;
  }
  std::string list;
  for (const char* c : choices) list += (list.empty() ? "" : ", ") + std::string(c);
  config_fail(key, "unknown value '" + v + "' (expected one of " + list + ")");
}

void emit_value(YAML::Emitter& out, const ConfigValue& v) {
  std::visit(
      [&](const auto& x) {
        using V = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<V, std::monostate>) {
          out << YAML::Null;
        } else if constexpr (std::is_same_v<V, std::vector<double>> || std::is_same_v<V, std::vector<std::string>>) {
          out << YAML::Flow << YAML::BeginSeq;
          for (const auto& e : x) out << e;
          out << YAML::EndSeq;
        } else if constexpr (std::is_same_v<V, std::vector<std::vector<double>>> ||
                             std::is_same_v<V, std::vector<std::vector<std::string>>>) {
          out << YAML::BeginSeq;
          for (const auto& row : x) {
            out << YAML::Flow << YAML::BeginSeq;
            for (const auto& e : row) out << e;
            out << YAML::EndSeq;
          }
          out << YAML::EndSeq;
        } else if constexpr (std::is_same_v<V, std::string>) {
          out << YAML::DoubleQuoted << x;
        } else {
          out << x;
        }
      },
      v);
}

}  // namespace

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case K::nodal: return "nodal";
    case K::sweepout: return "sweepout";
    case K::weyl: return "weyl";
    case K::heat: return "heat";
    case K::roots: return "roots";
    case K::almgren: return "almgren";
  }
  return "unknown";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  for (K k : {K::nodal, K::sweepout, K::weyl, K::heat, K::roots, K::almgren}) {
    if (name == to_string(k)) return k;
  }
  config_fail("scenario", "unknown scenario kind '" + name + "'");
}

ScenarioConfig ScenarioConfig::parse(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::parse_error, std::string("config is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw Error(ErrorCode::config_error, "config must be a mapping of sections");
  if (!root["scenario"]) config_fail("scenario", "missing");

  ScenarioConfig cfg;
  cfg.kind_ = scenario_kind_from_string(to_text(root["scenario"], "scenario"));
  for (const auto& entry : root) {
    const std::string section = entry.first.as<std::string>();
    if (section == "scenario") continue;
    if (section == "seed") {
      const double v = to_number(entry.second, "seed");
      if (v < 0 || v != std::floor(v) || v > 9e15) config_fail("seed", "expected a non-negative integer");
      cfg.seed_ = static_cast<std::uint64_t>(v);
      continue;
    }
    if (!entry.second.IsMap()) config_fail(section, "unknown key or not a section");
    for (const auto& kv : entry.second) {
      const std::string key = section + "." + kv.first.as<std::string>();
      const KeyDef* def = find_key(key);
      if (!def) config_fail(key, "unknown key");
      if (!allowed(*def, cfg.kind_)) config_fail(key, "not used by scenario '" + std::string(to_string(cfg.kind_)) + "'");
      if (cfg.values_.count(key)) config_fail(key, "given twice");
      if (kv.second.IsNull()) continue;
      cfg.values_[key] = convert(kv.second, *def);
    }
  }
  for (const auto& def : schema()) {
    if (allowed(def, cfg.kind_) && !cfg.values_.count(def.key) && !std::holds_alternative<std::monostate>(def.fallback)) {
      cfg.values_[def.key] = def.fallback;
    }
  }
  check_choice(cfg.values_, "geometry.kind", {"flat-torus", "dirichlet-rectangle", "sphere"});
  check_choice(cfg.values_, "sweepout.task", {"phi", "nonconcentration", "continuity"});
  check_choice(cfg.values_, "roots.task", {"selection", "graph_cover"});
  return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_error, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ScenarioConfig::to_yaml() const {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "scenario" << YAML::Value << to_string(kind_);
  out << YAML::Key << "seed" << YAML::Value << seed_;
  std::string open;
  for (const auto& def : schema()) {
    auto it = values_.find(def.key);
    if (it == values_.end()) continue;
    const std::string section = def.key.substr(0, def.key.find('.'));
    if (section != open) {
      if (!open.empty()) out << YAML::EndMap;
      out << YAML::Key << section << YAML::Value << YAML::BeginMap;
      open = section;
    }
    out << YAML::Key << def.key.substr(def.key.find('.') + 1) << YAML::Value;
    emit_value(out, it->second);
  }
  if (!open.empty()) out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

bool ScenarioConfig::has(const std::string& key) const { return values_.count(key) > 0; }

template <class V>
const V& ScenarioConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) config_fail(key, "required but not given");
  const V* v = std::get_if<V>(&it->second);
  if (!v) config_fail(key, "has the wrong type");
  return *v;
}

double ScenarioConfig::number(const std::string& key) const { return get<double>(key); }
long long ScenarioConfig::integer(const std::string& key) const { return static_cast<long long>(get<double>(key)); }
const std::string& ScenarioConfig::string(const std::string& key) const { return get<std::string>(key); }
bool ScenarioConfig::boolean(const std::string& key) const { return get<bool>(key); }
const std::vector<double>& ScenarioConfig::numbers(const std::string& key) const {
  return get<std::vector<double>>(key);
}
const std::vector<std::string>& ScenarioConfig::strings(const std::string& key) const {
  return get<std::vector<std::string>>(key);
}
const std::vector<std::vector<double>>& ScenarioConfig::number_rows(const std::string& key) const {
  return get<std::vector<std::vector<double>>>(key);
}
const std::vector<std::vector<std::string>>& ScenarioConfig::string_rows(const std::string& key) const {
  return get<std::vector<std::vector<std::string>>>(key);
}

}  // namespace nodalab
