#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "nodalab/config.h"

namespace nodalab {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  /// Output directory; created if missing. Empty: write nothing.
  std::filesystem::path out_dir;
  unsigned threads = 1;
};

struct RunResult {
  /// Deterministic report (no timings); written as report.json.
  nlohmann::ordered_json report;
  /// Wall-clock seconds per stage; written as timings.json.
  nlohmann::ordered_json timings;
  std::vector<std::string> files;
};

/// Runs one scenario. Configuration problems found while building the
/// geometry, basis or fields are raised as Error(config_error) with the key
/// named; failures inside the numerical pipeline keep their own code.
RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options);

}  // namespace nodalab
