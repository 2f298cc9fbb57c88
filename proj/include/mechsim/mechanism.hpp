#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <vector>

#include "mechsim/distopt.hpp"
#include "mechsim/feasible_set.hpp"
#include "mechsim/strategy.hpp"
#include "mechsim/types.hpp"

namespace mechsim {

// What one participant submits for outcome selection: its final decision from
// every sequence it ran in. Budget proposals are derived later from the
// declared evaluations at the published outcomes (see TauTamper).
struct MessageBundle {
  int agent = -1;
  Vector final_social;
  std::map<int, Vector> final_leave_one_out;  // j -> own final state in sequence j
};

std::vector<MessageBundle> make_bundles(const std::vector<SequenceTrace>& traces);

// Test hook: rewrite an agent's budget proposal after the honest values are
// computed (the mechanism never trusts tau beyond what the penalty term catches).
using TauTamper = std::function<void(int agent, std::map<int, double>& tau)>;

struct SettlementReport {
  bool all_quit = false;
  std::vector<int> participants;
  Vector o_star;                     // component-wise median of social decisions
  std::map<int, Vector> o_seq;       // per-participant sequence outcome
  std::map<int, double> payments;    // all invited agents; 0 for non-participants
  std::map<int, double> penalties;   // pi component of the payment
  std::map<int, double> e_terms;     // inconsistency scores (filtered mechanism)
  std::map<int, double> payoffs;     // -f_i(o*) - p_i against true costs
};

// Component-wise medians. Even counts take the midpoint of the middle pair.
Vector component_median(const std::vector<Vector>& points);

struct Outcomes {
  Vector o_star;
  std::map<int, Vector> o_seq;
};
Outcomes select_outcomes(const std::vector<MessageBundle>& bundles);

// Trusted centralized oracle: o* minimizes the sum; each payment is the
// externality the agent imposes on the rest.
std::pair<Vector, std::vector<double>> vcg_payment_centralized(
    const std::vector<EvaluationFunction>& evals, const FeasibleSet& X);

// Distributed settlement without filtering: payment = sum of others' declared
// social values minus their declared values of the agent's sequence outcome.
SettlementReport settle_devcg(const std::vector<MessageBundle>& bundles,
                              const StrategyProfile& strategy,
                              const std::vector<EvaluationFunction>& true_costs, int k_f,
                              double p_bar, const TauTamper& tamper = nullptr);

// Filtered settlement: adds the penalty pi_i = k_f * e_i + 1 when the agent's
// cross-sequence data or budget proposal is inconsistent (e_i > 0).
SettlementReport settle_devcg_g(const std::vector<MessageBundle>& bundles,
                                const StrategyProfile& strategy,
                                const std::vector<EvaluationFunction>& true_costs,
                                const std::vector<SequenceTrace>& traces, int k_s, int k_f,
                                double p_bar, const TauTamper& tamper = nullptr);

void write_settlement_json(std::ostream& out, const SettlementReport& report);

}  // namespace mechsim
