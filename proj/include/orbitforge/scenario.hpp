#pragma once

#include "orbitforge/plants.hpp"

#include <cstdint>
#include <map>
#include <string>

/// Scenario execution from flat key/value config files: build a packaged
/// system, run the closed loop, write the trajectory, and evaluate the
/// requested analyses against pinned thresholds.
namespace orbitforge {

inline constexpr int kExitPass = 0;
inline constexpr int kExitAnalysisFailure = 1;
inline constexpr int kExitConfigError = 2;

enum class PlantType { ImFixed, ImRotating, PendulumLocal, PendulumGlobal };

enum class ControllerVariant {
  Default,  ///< the packaged closed-form control
  Msea,     ///< regularized control through the shaped-energy design
  Epd,      ///< matching control through the pumping-and-damping design
  Custom,   ///< expressions loaded from a file, one per input
};

struct ScenarioConfig {
  std::string name = "scenario";
  PlantType plant_type = PlantType::ImFixed;
  ImParams im;
  PendulumParams pendulum;
  ControllerVariant variant = ControllerVariant::Default;
  std::string custom_controller_file;
  Vector initial_state;
  IntegratorSettings integrator;
  /// Raw [analyses] entries (validated keys, unparsed values).
  std::map<std::string, std::string> analyses;
  std::string out_dir = "out";
};

/// Parses config text. Throws ConfigError naming the offending
/// section.key and line for unknown sections/keys, duplicates, or malformed
/// values.
ScenarioConfig parse_config_text(const std::string& text);

/// Reads and parses a config file. Throws ConfigError if unreadable.
ScenarioConfig parse_config_file(const std::string& path);

/// Instantiates the configured plant + controller package.
PackagedSystem build_system(const ScenarioConfig& cfg);

/// Overrides a numeric config field addressed as "section.key"
/// (plant.* or integrator.*). Throws ConfigError for unknown keys.
void apply_override(ScenarioConfig& cfg, const std::string& key, double value);

struct ScenarioResult {
  bool pass = true;
  std::string summary;
  Trajectory trajectory;
};

/// Simulates the scenario, writes <out_dir>/trajectory.csv and
/// <out_dir>/summary.txt, and evaluates the configured analyses.
/// Integration blow-ups fail the result; config problems throw.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// Writes t, state, input, energy, orbit deviation, distance (and the gain
/// branch when present) with 17 significant digits per value.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

/// One-parameter sweep specification "section.key=lo:hi:steps".
struct SweepSpec {
  std::string key;
  double lo = 0.0;
  double hi = 0.0;
  int steps = 0;
};

SweepSpec parse_sweep_spec(const std::string& text);

/// Runs the scenario once per sweep value (inclusive linear spacing) in
/// parallel, each into <out_root>/<key>=<value>/. Returns kExitPass when
/// every run passes, kExitAnalysisFailure otherwise. Appends one line per
/// run to `log`.
int run_sweep(const ScenarioConfig& base, const SweepSpec& spec,
              const std::string& out_root, std::string& log);

}  // namespace orbitforge
