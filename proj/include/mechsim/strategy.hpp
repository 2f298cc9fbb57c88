#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "mechsim/evaluation.hpp"

namespace mechsim {

// What one agent declares to the mechanism: whether it joins, the evaluation
// it uses in the social sequence, and optional per-sequence overrides
// (sequence j = the run excluding agent j). Without overrides the declaration
// is sequence-independent.
struct AgentStrategy {
  bool participates = true;
  EvaluationFunction social = EvaluationFunction::empty();
  std::map<int, EvaluationFunction> sequence_overrides;  // j -> v used in sequence j
  std::map<int, double> shifts;  // j -> c for overrides of the form social + c

  static AgentStrategy quit() { return AgentStrategy{false, EvaluationFunction::empty(), {}, {}}; }
  static AgentStrategy truthful(const EvaluationFunction& v) {
    return AgentStrategy{true, v, {}, {}};
  }

  // Declare social + c in sequence j (c <= 0: the agent only ever undercuts).
  void set_shift(int j, double c) {
    if (c > 0) throw std::invalid_argument("sequence shift must be non-positive");
    sequence_overrides.insert_or_assign(j, social.shifted(c));
    shifts.insert_or_assign(j, c);
  }
  void set_sequence_eval(int j, const EvaluationFunction& v) {
    sequence_overrides.insert_or_assign(j, v);
    shifts.erase(j);
  }
  bool sequence_independent() const { return sequence_overrides.empty(); }
};

struct StrategyProfile {
  std::vector<AgentStrategy> agents;

  int size() const { return static_cast<int>(agents.size()); }
  std::vector<int> participants() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
      if (agents[i].participates) out.push_back(i);
    return out;
  }
  // Evaluation agent i runs with in the given sequence (-1 = social).
  const EvaluationFunction& eval_for(int i, int sequence) const {
    const auto& a = agents.at(i);
    if (!a.participates) throw std::domain_error("non-participant has no declaration");
    if (sequence >= 0 && sequence != i) {
      auto it = a.sequence_overrides.find(sequence);
      if (it != a.sequence_overrides.end()) return it->second;
    }
    return a.social;
  }
};

}  // namespace mechsim
