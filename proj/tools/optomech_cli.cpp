// optomech run <config> [--out DIR] [--jobs N]
// optomech validate <config>
//
// Exit codes: 0 success, 1 configuration error, 2 numeric error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "optomech/config.hpp"
#include "optomech/scenario.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kNumericError = 2;

optomech::ScenarioConfig load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw optomech::ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return optomech::parse_config(ss.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-mode optomechanical state conversion and pulse transmission simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned jobs = 1;
  auto* run = app.add_subcommand("run", "Run every sweep point of a scenario and write CSV artifacts");
  run->add_option("config", config_path, "Scenario config file")->required();
  run->add_option("--out", out_dir, "Output directory (overrides [output] dir)");
  run->add_option("--jobs", jobs, "Worker threads for sweep points")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "Parse and validate a config without running it");
  validate->add_option("config", config_path, "Scenario config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  optomech::ScenarioConfig cfg;
  try {
    cfg = load(config_path);
    for (std::size_t i = 0; i < cfg.run_count(); ++i) {
      for (const auto& w : optomech::validate_run(cfg.expand(i))) {
        std::cerr << "warning: " << w << " (run " << i << ")\n";
      }
    }
  } catch (const optomech::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  if (validate->parsed()) {
    std::cout << config_path << ": " << optomech::to_string(cfg.scenario) << ", " << cfg.run_count()
              << (cfg.run_count() == 1 ? " run" : " runs") << " planned\n";
    return 0;
  }

  try {
    const auto art = optomech::run_scenario(cfg, out_dir.empty() ? cfg.output_dir : out_dir, jobs);
    for (const auto& r : art.runs) std::cout << r.line(art.runs.size(), cfg.scenario) << "\n";
  } catch (const optomech::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const optomech::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericError;
  }
  return 0;
}
