#include "mechsim/distopt.hpp"

#include <cstdio>
#include <future>
#include <ostream>
#include <stdexcept>

namespace mechsim {

SequenceTrace run_sequence(const CommGraph& graph, const std::vector<int>& participants,
                           const std::map<int, EvaluationFunction>& evals, const FeasibleSet& X,
                           const std::map<int, Vector>& x0, int k_f, const StepRule& rule) {
  if (participants.empty()) throw std::invalid_argument("run_sequence: no participants");
  if (k_f < 1) throw std::invalid_argument("run_sequence: k_f must be >= 1");
  if (!graph.connected(participants))
    throw std::runtime_error("run_sequence: participant subgraph is disconnected");
  const int m = static_cast<int>(participants.size());
  for (int i : participants) {
    if (!evals.count(i)) throw std::invalid_argument("run_sequence: missing evaluation");
    if (!x0.count(i) || !X.contains(x0.at(i)))
      throw std::invalid_argument("run_sequence: initial state missing or infeasible");
  }

  const Matrix W = graph.mixing_weights(participants);
  SequenceTrace trace;
  trace.k_f = k_f;
  trace.participants = participants;
  trace.states.resize(k_f + 1);
  trace.gradients.resize(k_f + 1);
  for (int i : participants) trace.states[0][i] = x0.at(i);

  for (int k = 0; k <= k_f; ++k) {
    auto& xs = trace.states[k];
    auto& gs = trace.gradients[k];
    for (int i : participants) gs[i] = evals.at(i).gradient(xs.at(i));
    if (k == k_f) break;
    const double step = rule.alpha(k) * m;
    auto& next = trace.states[k + 1];
    for (int a = 0; a < m; ++a) {
      const int i = participants[a];
      // consensus form of sum_b w_ab x_b; exact under identical states
      Vector mix = xs.at(i);
      for (int b = 0; b < m; ++b)
        if (b != a) mix += W(a, b) * (xs.at(participants[b]) - xs.at(i));
      next[i] = X.project(mix - step * gs.at(i));
    }
  }
  return trace;
}

double disagreement(const SequenceTrace& trace, int k, const StepRule& rule) {
  if (k < 0 || k > trace.k_f) throw std::out_of_range("disagreement: step out of range");
  const auto& xs = trace.states[k];
  const auto& gs = trace.gradients[k];
  double spread = 0.0;
  for (auto it = xs.begin(); it != xs.end(); ++it)
    for (auto jt = std::next(it); jt != xs.end(); ++jt)
      spread = std::max(spread, (it->second - jt->second).norm());
  Vector total = Vector::Zero(xs.begin()->second.size());
  for (const auto& [i, g] : gs) total += g;
  return spread + rule.alpha(k) * total.norm();
}

std::vector<SequenceTrace> run_all_sequences(const CommGraph& graph,
                                             const StrategyProfile& strategy, const FeasibleSet& X,
                                             const std::map<int, Vector>& x0, int k_f,
                                             const StepRule& rule, bool parallel) {
  const std::vector<int> participants = strategy.participants();
  if (participants.empty()) throw std::invalid_argument("run_all_sequences: nobody participates");

  std::vector<int> sequence_ids{-1};
  if (participants.size() > 1)
    for (int j : participants) sequence_ids.push_back(j);

  auto run_one = [&](int seq) {
    std::vector<int> members;
    std::map<int, EvaluationFunction> evals;
    for (int i : participants) {
      if (i == seq) continue;
      members.push_back(i);
      evals.emplace(i, strategy.eval_for(i, seq));
    }
    SequenceTrace t = run_sequence(graph, members, evals, X, x0, k_f, rule);
    t.excluded = seq;
    return t;
  };

  std::vector<SequenceTrace> traces(sequence_ids.size());
  if (parallel && sequence_ids.size() > 1) {
    std::vector<std::future<SequenceTrace>> futures;
    futures.reserve(sequence_ids.size());
    for (int seq : sequence_ids)
      futures.push_back(std::async(std::launch::async, run_one, seq));
    for (size_t s = 0; s < futures.size(); ++s) traces[s] = futures[s].get();
  } else {
    for (size_t s = 0; s < sequence_ids.size(); ++s) traces[s] = run_one(sequence_ids[s]);
  }
  return traces;
}

std::map<int, Vector> default_initial_states(const std::vector<int>& participants,
                                             const FeasibleSet& X) {
  std::map<int, Vector> x0;
  const Vector origin = X.project(Vector::Zero(X.dimension()));
  for (int i : participants) x0[i] = origin;
  return x0;
}

void write_trace_csv(std::ostream& out, const std::vector<SequenceTrace>& traces) {
  out << "sequence,step,agent,coordinate,state,gradient\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& t : traces)
    for (int k = 0; k <= t.k_f; ++k)
      for (int i : t.participants) {
        const Vector& x = t.states[k].at(i);
        const Vector& g = t.gradients[k].at(i);
        for (int c = 0; c < x.size(); ++c)
          out << t.excluded << ',' << k << ',' << i << ',' << c << ',' << num(x(c)) << ','
              << num(g(c)) << '\n';
      }
}

}  // namespace mechsim
