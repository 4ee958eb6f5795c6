#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <iostream>

#include "hyfsi/run.hpp"
#include "hyfsi/scenario.hpp"
#include "hyfsi/verify.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Hybrid Eulerian-ALE fluid-structure interaction solver"};
  app.require_subcommand(1);

  std::string config_path, out_dir, restart;
  int max_steps = -1;
  bool quiet = false;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario");
  run_cmd->add_option("--config", config_path, "Scenario config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "Output directory")->required();
  run_cmd->add_option("--max-steps", max_steps, "Stop after this many steps")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--restart", restart, "Continue from a checkpoint file")->check(CLI::ExistingFile);
  run_cmd->add_flag("--quiet", quiet, "Do not log every step");

  std::string name, emit, mode = "hybrid";
  auto* scen_cmd = app.add_subcommand("scenario", "Write a built-in scenario config");
  scen_cmd->add_option("--name", name, "Built-in scenario name")->required();
  scen_cmd->add_option("--emit", emit, "Destination config file")->required();
  scen_cmd->add_option("--mode", mode, "hybrid or fixed_grid")->check(CLI::IsMember({"hybrid", "fixed_grid"}));

  std::string suite;
  auto* verify_cmd = app.add_subcommand("verify", "Run a property suite");
  verify_cmd->add_option("--suite", suite, "Suite name")
      ->required()
      ->check(CLI::IsMember(hyfsi::verify_suite_names()));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      hyfsi::RunOptions opt;
      opt.out_dir = out_dir;
      if (max_steps >= 0) opt.max_steps = max_steps;
      if (!restart.empty()) opt.restart = restart;
      opt.quiet = quiet;
      const auto rep = hyfsi::run(hyfsi::load_config(config_path), opt);
      spdlog::info("{} steps in {:.1f} s", rep.steps, rep.wall_seconds);
      return rep.ok ? 0 : 3;
    }
    if (*scen_cmd) {
      hyfsi::save_config(hyfsi::builtin_scenario(name, hyfsi::mode_from_string(mode)), emit);
      return 0;
    }
    if (*verify_cmd) {
      bool all = true;
      for (const auto& r : hyfsi::run_verify_suite(suite)) {
        std::cout << hyfsi::format_result(r) << '\n';
        all = all && r.passed;
      }
      return all ? 0 : 1;
    }
  } catch (const hyfsi::ConfigError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const hyfsi::Error& e) {
    spdlog::error("{}", e.what());
    return 3;
  }
  return 0;
}
