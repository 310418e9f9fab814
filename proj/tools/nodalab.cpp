#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nodalab/config.h"
#include "nodalab/error.h"
#include "nodalab/scenario.h"

namespace {

constexpr int kConfigFailure = 2;
constexpr int kNumericFailure = 3;

int run(const std::string& scenario, const std::string& config_path, const std::string& out_dir,
        std::optional<std::uint64_t> seed, unsigned threads) {
  using namespace nodalab;
  try {
    ScenarioConfig cfg = ScenarioConfig::load(config_path);
    if (to_string(cfg.kind()) != scenario) {
      std::cerr << "config-error: scenario: file declares '" << to_string(cfg.kind()) << "' but '" << scenario
                << "' was requested\n";
      return kConfigFailure;
    }
    if (seed) cfg.set_seed(*seed);
    RunOptions opts;
    opts.out_dir = out_dir;
    opts.threads = threads;
    const RunResult r = run_scenario(cfg, opts);
    std::cout << scenario << ": wrote " << r.files.size() << " files to " << out_dir << '\n';
    for (const auto& f : r.files) std::cout << "  " << f << '\n';
    return 0;
  } catch (const Error& e) {
    std::cerr << scenario << ": " << e.what() << '\n';
    const bool config = e.code() == ErrorCode::config_error || e.code() == ErrorCode::parse_error;
    return config ? kConfigFailure : kNumericFailure;
  } catch (const std::exception& e) {
    std::cerr << scenario << ": " << e.what() << '\n';
    return kNumericFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nodal-set geometry experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  int status = 0;

  for (const char* name : {"nodal", "sweepout", "weyl", "heat", "roots", "almgren"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run a ") + name + " scenario");
    sub->add_option("--config", config_path, "scenario file (YAML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();
    sub->callback([&, name] { status = run(name, config_path, out_dir, seed, threads); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigFailure;
  }
  return status;
}
