#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mechsim/distopt.hpp"
#include "mechsim/graph.hpp"
#include "mechsim/mechanism.hpp"
#include "mechsim/strategy.hpp"

namespace mechsim {

enum class MechanismKind { devcg, devcg_g };

// Everything a strategy profile needs to be priced: the communication graph,
// the common feasible set, the agents' true costs, and the run parameters.
// k_s is drawn per run, uniformly from the last `k_s_window` steps, seeded.
struct GameEnvironment {
  CommGraph graph;
  FeasibleSet X;
  std::vector<EvaluationFunction> true_costs;
  int k_f = 300;
  int k_s_window = 4;
  StepRule step;
  double p_bar = 1e6;
  unsigned seed = 0;
  bool parallel_sequences = false;
};

struct SimulationResult {
  SettlementReport report;
  std::vector<SequenceTrace> traces;
  int k_s = 0;
  double epsilon = 0.0;  // measured run tolerance, see measured_epsilon
};

// Runs every sequence for the profile, settles under the chosen mechanism,
// and reports payoffs against the true costs. `seed_offset` perturbs the
// k_s draw deterministically (used for grid cells).
SimulationResult simulate(const GameEnvironment& env, const StrategyProfile& profile,
                          MechanismKind kind, unsigned seed_offset = 0);

// Per-agent payoffs only (convenience wrapper around simulate).
std::map<int, double> payoff(const GameEnvironment& env, const StrategyProfile& profile,
                             MechanismKind kind);

// Data-driven slack estimate for one run: per sequence, the final disagreement
// d scaled by the total final gradient norm plus a curvature term L d^2,
// summed over sequences. Bounds how far settled values can sit from their
// exact-consensus counterparts; shrinks as k_f grows.
double measured_epsilon(const std::vector<SequenceTrace>& traces,
                        const std::vector<EvaluationFunction>& true_costs,
                        const StepRule& rule);

// One labeled entry of an agent's finite strategy menu.
struct StrategyOption {
  std::string label;
  AgentStrategy strategy;
};

// Finite game over per-agent menus with a payoff tensor filled by simulation.
// Cells are flattened row-major (last agent's index fastest).
struct GridGame {
  std::vector<std::vector<StrategyOption>> options;  // per agent
  std::vector<int> truthful_index;                   // per agent, into options
  std::vector<std::vector<double>> payoffs;          // [cell][agent]
  std::vector<double> epsilons;                      // [cell]
  bool filled = false;

  int num_agents() const { return static_cast<int>(options.size()); }
  long total_cells() const;
  long flat_index(const std::vector<int>& idx) const;
  std::vector<int> cell_at(long flat) const;
  StrategyProfile profile_at(const std::vector<int>& idx) const;
};

GridGame make_grid(std::vector<std::vector<StrategyOption>> options,
                   std::vector<int> truthful_index);

// Simulates every cell (optionally across `jobs` worker threads; results and
// seeds are independent of scheduling). Refuses grids above 10^6 cells.
void fill_grid(GridGame& game, const GameEnvironment& env, MechanismKind kind, int jobs = 1);

struct BestResponse {
  int option = -1;
  std::string label;
  double payoff = 0.0;
};

// Argmax of the agent's menu against fixed opponents (`at` supplies the full
// index vector; the agent's own entry is ignored). Ties within a hair prefer
// the truthful option, then the lowest index, so a tie never certifies a
// manipulation as strictly better.
BestResponse best_response(const GridGame& game, int agent, const std::vector<int>& at);

struct DseViolation {
  int agent = -1;
  std::vector<int> cell;  // opponents' profile where the violation occurs
  int deviation = -1;
  double gain = 0.0;
};

struct DseVerdict {
  bool pass = true;
  double worst_gain = 0.0;
  std::optional<DseViolation> worst;
};

// Checks whether `candidate` is an eps-dominant-strategy profile: for every
// agent, every opponents' cell, and every unilateral menu deviation,
// u(candidate_i) + eps >= u(deviation). Reports the worst gain either way.
DseVerdict epsilon_dse_check(const GridGame& game, const std::vector<int>& candidate,
                             double eps);

// Exhaustive pure-equilibrium search. A deviation improves when it raises the
// deviator's payoff by more than `tol`, or ties within `tol` while strictly
// lowering everyone else's total (the malicious tie-break). Errors above 10^6
// cells.
std::vector<std::vector<int>> brute_force_nash(const GridGame& game, double tol = 1e-6);

struct BandCheckRow {
  int agent = -1;
  int sequence = -1;
  double shift = 0.0;
  double lower = 0.0;  // band floor evaluated at the realized outcomes
};

struct BandCheckReport {
  bool pass = true;
  double worst_band_violation = 0.0;      // how far any shift sits below its band
  double worst_aggregate_violation = 0.0; // aggregate-inequality excess, if any
  std::vector<BandCheckRow> rows;
};

// Validates a shifted-family profile against the per-pair value bands at the
// realized outcomes and the aggregate harm inequality, with slack eps.
BandCheckReport maliciousness_bound_check(const StrategyProfile& profile,
                                          const SettlementReport& report,
                                          const std::vector<EvaluationFunction>& true_costs,
                                          double eps);

// Long-format tensor export: one row per (cell, agent).
void write_grid_csv(std::ostream& out, const GridGame& game);

}  // namespace mechsim
