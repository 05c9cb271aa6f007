#include "orbitforge/scenario.hpp"
#include "orbitforge/verify.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

using namespace orbitforge;

int main(int argc, char** argv) {
  CLI::App app{
      "orbitforge: design audits and closed-loop simulation for orbital "
      "stabilization"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string design;
  std::string param;
  int grid = 1000;
  std::uint64_t seed = kDefaultSeed;

  CLI::App* run = app.add_subcommand(
      "run", "simulate a scenario config and evaluate its analyses");
  run->add_option("config", config_path, "scenario config file")->required();
  CLI::Option* run_out =
      run->add_option("--out", out_dir, "override the output directory");

  CLI::App* verify = app.add_subcommand(
      "verify", "audit a built-in design over a sampling grid");
  verify->add_option("design", design, "built-in design name")->required();
  verify->add_option("--grid", grid, "number of sampled states")
      ->check(CLI::PositiveNumber);
  CLI::Option* seed_opt =
      verify->add_option("--seed", seed, "sampling seed (also ORBITFORGE_SEED)");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "run a scenario once per value of a swept parameter");
  sweep->add_option("config", config_path, "scenario config file")->required();
  sweep->add_option("--param", param, "sweep spec: section.key=lo:hi:steps")
      ->required();
  CLI::Option* sweep_out =
      sweep->add_option("--out", out_dir, "override the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfigError;
  }

  try {
    if (run->parsed()) {
      ScenarioConfig cfg = parse_config_file(config_path);
      if (run_out->count() > 0) cfg.out_dir = out_dir;
      const ScenarioResult result = run_scenario(cfg);
      std::cout << result.summary;
      return result.pass ? kExitPass : kExitAnalysisFailure;
    }
    if (verify->parsed()) {
      if (seed_opt->count() == 0) {
        if (const char* env = std::getenv("ORBITFORGE_SEED")) {
          seed = std::strtoull(env, nullptr, 10);
        }
      }
      const Report report = verify_design(design, grid, seed);
      std::cout << report.to_text();
      return report.pass() ? kExitPass : kExitAnalysisFailure;
    }
    // sweep
    ScenarioConfig cfg = parse_config_file(config_path);
    const SweepSpec spec = parse_sweep_spec(param);
    const std::string out_root =
        sweep_out->count() > 0 ? out_dir : cfg.out_dir;
    std::string log;
    const int code = run_sweep(cfg, spec, out_root, log);
    std::cout << log;
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAnalysisFailure;
  }
}
