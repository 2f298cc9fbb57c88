#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mechsim/distopt.hpp"
#include "mechsim/game.hpp"
#include "mechsim/scenario.hpp"

namespace mechsim {

// Bad config file. what() holds one "path: problem" line per defect; parse
// failures carry the line number.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  std::string type = "ev";           // "ev" | "synthetic"
  EvParams ev = desk_ev_params();    // used when type == "ev"
  SyntheticParams synthetic;
};

struct GraphConfig {
  std::string kind = "complete";  // "complete" | "ring" | "edges"
  std::vector<std::pair<int, int>> edges;
};

// One sweep axis. `agent` restricts a deviation sweep to a single agent's
// unilateral moves; -1 keeps the experiment's default (every agent for the
// declaration sweep, agent 0 for the misreport-range and malice sweeps).
struct SweepConfig {
  std::string parameter;
  std::vector<double> values;
  int agent = -1;
};

struct ExperimentConfig {
  std::string experiment;
  ScenarioConfig scenario;
  MechanismKind mechanism = MechanismKind::devcg;
  GraphConfig graph;
  int k_f = 300;
  int k_s_window = 4;
  StepRule step;
  double p_bar = 1e6;
  unsigned seed = 0;
  SweepConfig sweep;
  std::string out = "mechsim-out";
};

// The recognized experiment names, in listing order.
const std::vector<std::string>& experiment_names();

bool is_sweep_experiment(const std::string& name);

// Parse + validate. Throws ConfigError listing every defect with its path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Fully resolved round-trippable echo of the config (all defaults filled),
// serialized as the same format parse_config accepts. Indented, LF endings.
std::string echo_config(const ExperimentConfig& config);

// Instance + environment assembly shared by the runner and the tests.
struct BuiltScenario {
  std::vector<EvaluationFunction> costs;
  FeasibleSet X;
};
BuiltScenario build_scenario(const ScenarioConfig& scenario);
CommGraph build_graph(const GraphConfig& graph, int agents);
GameEnvironment build_environment(const ExperimentConfig& config);

}  // namespace mechsim
