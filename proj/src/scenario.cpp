#include "mechsim/scenario.hpp"

#include <random>
#include <stdexcept>

namespace mechsim {

namespace {

void validate(const EvParams& p) {
  if (p.agents < 1 || p.slots < 1) throw std::invalid_argument("ev instance needs agents and slots");
  if (p.beta <= 0.0) throw std::invalid_argument("congestion weight must be positive");
  if (p.degradation <= 0.0) throw std::invalid_argument("degradation must be positive");
  if (p.delta_t <= 0.0) throw std::invalid_argument("slot length must be positive");
  if (p.battery_capacity <= 0.0) throw std::invalid_argument("battery capacity must be positive");
  if (static_cast<int>(p.alpha.size()) != p.agents)
    throw std::invalid_argument("one deficit weight per agent required");
  if (!p.gamma.empty() && static_cast<int>(p.gamma.size()) != p.agents)
    throw std::invalid_argument("gamma must be empty or one per agent");
  if (static_cast<int>(p.initial_soc.size()) != p.agents)
    throw std::invalid_argument("one initial state of charge per agent required");
  if (static_cast<int>(p.demand.size()) != p.slots)
    throw std::invalid_argument("demand profile must cover every slot");
  for (double a : p.alpha)
    if (a <= 0.0) throw std::invalid_argument("deficit weights must be positive");
  for (double s : p.initial_soc)
    if (s < 0.0 || s >= p.max_soc)
      throw std::invalid_argument("initial state of charge must lie in [0, max_soc)");
}

double slot_bound(const EvParams& p) {
  return p.x_max > 0.0 ? p.x_max : p.battery_capacity / 4.0;
}

ChargingCostTerms terms_for(const EvParams& p, int owner, double alpha) {
  ChargingCostTerms t;
  t.agents = p.agents;
  t.slots = p.slots;
  t.owner = owner;
  t.delta_t = p.delta_t;
  t.degradation = p.degradation;
  t.alpha = alpha;
  t.target = p.battery_capacity * (p.max_soc - p.initial_soc[owner]);
  t.beta = p.beta;
  t.base = p.base_price;
  t.gamma = p.gamma.empty() ? 0.0 : p.gamma[owner];
  t.demand = Vector::Zero(p.slots);
  for (int s = 0; s < p.slots; ++s) t.demand(s) = p.demand[s];
  return t;
}

}  // namespace

EvParams desk_ev_params() {
  EvParams p;
  p.alpha = {10.0, 4.0, 8.0, 7.0};
  p.initial_soc = {0.1, 0.15, 0.23, 0.14};
  p.demand = {12.0, 4.0, 2.0, 8.0};
  return p;
}

std::vector<double> charging_targets(const EvParams& p) {
  validate(p);
  std::vector<double> targets;
  for (int i = 0; i < p.agents; ++i)
    targets.push_back(p.battery_capacity * (p.max_soc - p.initial_soc[i]));
  return targets;
}

EvInstance build_ev_instance(const EvParams& p) {
  validate(p);
  const int dim = p.agents * p.slots;
  const double bound = slot_bound(p);
  if (bound <= 0.0) throw std::invalid_argument("per-slot charging bound must be positive");
  FeasibleSet X = FeasibleSet::box(Vector::Zero(dim), Vector::Constant(dim, bound));
  std::vector<EvaluationFunction> costs;
  for (int i = 0; i < p.agents; ++i) {
    double target = p.battery_capacity * (p.max_soc - p.initial_soc[i]);
    if (target <= 0.0) throw std::invalid_argument("battery already at its state-of-charge cap");
    X.add_cap(i * p.slots, p.slots, target);
    costs.push_back(EvaluationFunction::charging_cost(terms_for(p, i, p.alpha[i])));
  }
  return {std::move(costs), std::move(X)};
}

EvaluationFunction ev_declared_cost(const EvParams& p, int owner, double alpha) {
  validate(p);
  if (owner < 0 || owner >= p.agents) throw std::invalid_argument("owner out of range");
  if (alpha <= 0.0) throw std::invalid_argument("deficit weights must be positive");
  return EvaluationFunction::charging_cost(terms_for(p, owner, alpha));
}

std::vector<std::vector<double>> tisd_perturbation(const std::vector<double>& alpha_true,
                                                   double range, unsigned seed) {
  if (range < 0.0) throw std::invalid_argument("perturbation range must be non-negative");
  const int n = static_cast<int>(alpha_true.size());
  std::mt19937 rng(seed);
  std::vector<std::vector<double>> alpha(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double u = 2.0 * (rng() / 4294967296.0) - 1.0;  // fixed by seed, scaled by range
      alpha[i][j] = (j == i) ? alpha_true[i] : alpha_true[i] + range * u;
    }
  return alpha;
}

StrategyProfile tisd_profile(const EvParams& p,
                             const std::vector<std::vector<double>>& alpha) {
  validate(p);
  if (static_cast<int>(alpha.size()) != p.agents)
    throw std::invalid_argument("one weight row per agent required");
  StrategyProfile profile;
  for (int i = 0; i < p.agents; ++i) {
    if (static_cast<int>(alpha[i].size()) != p.agents)
      throw std::invalid_argument("one weight per sequence required");
    AgentStrategy s =
        AgentStrategy::truthful(EvaluationFunction::charging_cost(terms_for(p, i, p.alpha[i])));
    for (int j = 0; j < p.agents; ++j) {
      if (j == i || alpha[i][j] == p.alpha[i]) continue;
      if (alpha[i][j] <= 0.0)
        throw std::invalid_argument("perturbed deficit weights must stay positive");
      s.set_sequence_eval(j, EvaluationFunction::charging_cost(terms_for(p, i, alpha[i][j])));
    }
    profile.agents.push_back(std::move(s));
  }
  return profile;
}

SyntheticInstance build_synthetic_instance(const SyntheticParams& p) {
  if (p.a.empty() || p.a.size() != p.m.size())
    throw std::invalid_argument("synthetic instance needs matching curvature and minimum lists");
  if (!(p.lo < p.hi)) throw std::invalid_argument("empty interval");
  for (double a : p.a)
    if (a <= 0.0) throw std::invalid_argument("curvatures must be positive");
  SyntheticInstance out{{}, FeasibleSet::box(Vector::Constant(1, p.lo), Vector::Constant(1, p.hi))};
  for (size_t i = 0; i < p.a.size(); ++i)
    out.costs.push_back(EvaluationFunction::parabola(p.a[i], p.m[i], 0.0));
  return out;
}

}  // namespace mechsim
