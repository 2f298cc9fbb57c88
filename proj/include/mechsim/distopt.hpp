#pragma once

#include <iosfwd>
#include <map>
#include <vector>

#include "mechsim/feasible_set.hpp"
#include "mechsim/graph.hpp"
#include "mechsim/strategy.hpp"
#include "mechsim/types.hpp"

namespace mechsim {

// Diminishing step size a/(k+b).
struct StepRule {
  double a = 1.0;
  double b = 10.0;
  double alpha(int k) const { return a / (k + b); }
};

// One distributed run: per-step per-agent states and gradients, k_f+1 of each.
// `excluded` = -1 for the social sequence, otherwise the left-out agent.
struct SequenceTrace {
  int excluded = -1;
  int k_f = 0;
  std::vector<int> participants;                 // ascending agent ids
  std::vector<std::map<int, Vector>> states;     // [k][agent]
  std::vector<std::map<int, Vector>> gradients;  // [k][agent]
};

// Distributed projected subgradient descent on sum of the given evaluations:
//   x_i^{k+1} = project(X, sum_j w_ij x_j^k - alpha_k * |participants| * g_i^k)
// over the induced participant subgraph with Metropolis weights.
SequenceTrace run_sequence(const CommGraph& graph, const std::vector<int>& participants,
                           const std::map<int, EvaluationFunction>& evals, const FeasibleSet& X,
                           const std::map<int, Vector>& x0, int k_f, const StepRule& rule);

// Max pairwise state distance at step k plus the step-scaled norm of the
// summed gradients; a cheap stationarity/consensus diagnostic.
double disagreement(const SequenceTrace& trace, int k, const StepRule& rule);

// The social sequence plus one leave-one-out sequence per participant (skipped
// when it would be empty). Sequence j runs each remaining agent with its
// declared evaluation for that sequence.
std::vector<SequenceTrace> run_all_sequences(const CommGraph& graph,
                                             const StrategyProfile& strategy, const FeasibleSet& X,
                                             const std::map<int, Vector>& x0, int k_f,
                                             const StepRule& rule, bool parallel = false);

// Common default start: every agent at the projection of the origin.
std::map<int, Vector> default_initial_states(const std::vector<int>& participants,
                                             const FeasibleSet& X);

// Long-format export: sequence,step,agent,coordinate,state,gradient.
void write_trace_csv(std::ostream& out, const std::vector<SequenceTrace>& traces);

}  // namespace mechsim
