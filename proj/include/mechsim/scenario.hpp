#pragma once

#include <vector>

#include "mechsim/evaluation.hpp"
#include "mechsim/feasible_set.hpp"
#include "mechsim/strategy.hpp"

namespace mechsim {

// Fleet-charging instance: each agent schedules charging power over `slots`
// periods, paying for battery wear, missing its energy target, and congestion
// on the shared feeder.
struct EvParams {
  int agents = 4;
  int slots = 4;
  double delta_t = 1.0;      // hours per slot
  double beta = 0.005;       // congestion weight, common knowledge
  double base_price = 200.0; // additive connection fee
  double degradation = 0.002;
  double battery_capacity = 30.0;  // kWh
  double max_soc = 0.9;
  std::vector<double> alpha;        // per agent: weight on the energy deficit
  std::vector<double> gamma;        // per agent: additive constant (may be empty = zeros)
  std::vector<double> initial_soc;  // per agent
  std::vector<double> demand;       // per slot, kW
  double x_max = -1.0;              // per-slot charging bound; <0 picks capacity/4
};

// The four-agent, four-slot instance frozen across the test suite.
EvParams desk_ev_params();

// Energy each battery still accepts: capacity * (max_soc - initial_soc).
std::vector<double> charging_targets(const EvParams& params);

struct EvInstance {
  std::vector<EvaluationFunction> costs;  // over the joint variable, one per agent
  FeasibleSet X;                          // per-slot box plus per-agent energy caps
};

EvInstance build_ev_instance(const EvParams& params);

// Agent `owner`'s cost rebuilt with a different deficit weight — the
// declaration family used by misreporting strategies.
EvaluationFunction ev_declared_cost(const EvParams& params, int owner, double alpha);

// Per-agent, per-sequence deficit weights alpha_i(j) = alpha_true(i) + range*u,
// u uniform on [-1, 1] and fixed by the seed alone, so the same draw scales
// continuously across ranges. The own/social entry stays truthful.
std::vector<std::vector<double>> tisd_perturbation(const std::vector<double>& alpha_true,
                                                   double range, unsigned seed);

// Profile in which every agent declares, for each other sequence j, its cost
// rebuilt with alpha[i][j]; social declarations stay truthful.
StrategyProfile tisd_profile(const EvParams& params,
                             const std::vector<std::vector<double>>& alpha);

// One-dimensional quadratic family a_i (x - m_i)^2 on [lo, hi]; the workhorse
// for oracle comparisons and filter demos.
struct SyntheticParams {
  std::vector<double> a;
  std::vector<double> m;
  double lo = -5.0;
  double hi = 5.0;
};

struct SyntheticInstance {
  std::vector<EvaluationFunction> costs;
  FeasibleSet X;
};

SyntheticInstance build_synthetic_instance(const SyntheticParams& params);

}  // namespace mechsim
