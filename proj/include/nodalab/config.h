#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace nodalab {

enum class ScenarioKind { nodal, sweepout, weyl, heat, roots, almgren };
const char* to_string(ScenarioKind kind);
/// Throws Error(config_error) for unknown names.
ScenarioKind scenario_kind_from_string(const std::string& name);

enum class ValueType { integer, number, string, boolean, numbers, strings, number_rows, string_rows };

using ConfigValue =
    std::variant<std::monostate, double, std::string, bool, std::vector<double>, std::vector<std::string>,
                 std::vector<std::vector<double>>, std::vector<std::vector<std::string>>>;

/// Validated scenario configuration.
///
/// Text form is YAML: top-level `scenario` and `seed`, then one mapping per
/// section (`geometry`, `basis`, `field`, `nodal`, ...). Every key has a
/// declared type; numbers may be written as constant expressions such as
/// "2*pi". Unknown keys, keys that do not belong to the scenario, and
/// values of the wrong type are rejected with the offending key named.
class ScenarioConfig {
 public:
  static ScenarioConfig parse(const std::string& text);
  static ScenarioConfig load(const std::filesystem::path& path);

  /// Canonical YAML: schema order, defaults filled in, numbers at full
  /// precision. parse(to_yaml()) reproduces the same configuration.
  std::string to_yaml() const;

  ScenarioKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  /// Whether `key` ("section.name") has a value (given or defaulted).
  bool has(const std::string& key) const;
  double number(const std::string& key) const;
  long long integer(const std::string& key) const;
  const std::string& string(const std::string& key) const;
  bool boolean(const std::string& key) const;
  const std::vector<double>& numbers(const std::string& key) const;
  const std::vector<std::string>& strings(const std::string& key) const;
  const std::vector<std::vector<double>>& number_rows(const std::string& key) const;
  const std::vector<std::vector<std::string>>& string_rows(const std::string& key) const;

  bool operator==(const ScenarioConfig&) const = default;

 private:
  template <class T>
  const T& get(const std::string& key) const;

  ScenarioKind kind_ = ScenarioKind::nodal;
  std::uint64_t seed_ = 0;
  std::map<std::string, ConfigValue> values_;
};

}  // namespace nodalab
