#include "mechsim/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "mechsim/filter.hpp"

namespace mechsim {

namespace {

// Accelerated projected gradient on the sum of the given evaluations; trusted
// centralized oracle, tight tolerance, hard iteration cap.
Vector minimize_sum(const std::vector<const EvaluationFunction*>& fs, const FeasibleSet& X) {
  if (fs.empty()) throw std::invalid_argument("minimize_sum: nothing to minimize");
  double L = 0.0;
  for (auto* f : fs) L += f->smoothness();
  L = std::max(L, 1e-12);
  auto grad = [&](const Vector& x) {
    Vector g = Vector::Zero(X.dimension());
    for (auto* f : fs) g += f->gradient(x);
    return g;
  };
  Vector x = X.project(Vector::Zero(X.dimension()));
  Vector y = x;
  double t_prev = 1.0;
  const double tol = 1e-10 * std::max(1.0, grad(x).norm());
  for (int it = 0; it < 500000; ++it) {
    Vector g = grad(y);
    Vector xn = X.project(y - g / L);
    if ((L * (y - xn)).norm() <= tol && (xn - x).norm() <= tol) return xn;
    double t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
    Vector yn = xn + ((t_prev - 1.0) / t) * (xn - x);
    if ((yn - xn).dot(xn - x) > 0.0) {  // adaptive restart
      yn = xn;
      t = 1.0;
    }
    y = yn;
    t_prev = t;
    x = xn;
  }
  throw std::runtime_error("centralized minimizer did not converge");
}

double sum_values(const std::vector<const EvaluationFunction*>& fs, const Vector& x) {
  double v = 0.0;
  for (auto* f : fs) v += f->value(x);
  return v;
}

// Payment rule shared by both settlements: sum over other participants of
// their declared social value minus their declared value of this agent's
// sequence outcome. Identical code path keeps the two mechanisms bit-equal
// whenever no penalty applies.
std::map<int, double> base_payments(const std::vector<int>& participants,
                                    const std::map<int, std::map<int, double>>& tau) {
  std::map<int, double> p;
  for (int i : participants) {
    double social = 0.0, cross = 0.0;
    for (int j : participants) {
      if (j == i) continue;
      social += tau.at(j).at(-1);
      cross += tau.at(j).at(i);
    }
    p[i] = social - cross;
  }
  return p;
}

struct SettlementInputs {
  std::vector<int> participants;
  std::vector<int> invited;
  Outcomes outcomes;
  std::map<int, std::map<int, double>> tau;  // participant -> proposal
};

// Outcome selection plus honest budget proposals (declared evaluations applied
// to the published outcomes), then the tamper hook.
SettlementInputs prepare(const std::vector<MessageBundle>& bundles,
                         const StrategyProfile& strategy, const TauTamper& tamper) {
  SettlementInputs in;
  in.participants = strategy.participants();
  for (int i = 0; i < strategy.size(); ++i) in.invited.push_back(i);
  if (in.participants.empty()) return in;
  if (bundles.size() != in.participants.size())
    throw std::invalid_argument("settlement: bundles do not match the participant set");
  in.outcomes = select_outcomes(bundles);
  for (int i : in.participants) {
    auto& t = in.tau[i];
    t[-1] = strategy.eval_for(i, -1).value(in.outcomes.o_star);
    for (int j : in.invited) {
      if (j == i) continue;
      const Vector& oj =
          in.outcomes.o_seq.count(j) ? in.outcomes.o_seq.at(j) : in.outcomes.o_star;
      t[j] = strategy.eval_for(i, j).value(oj);
    }
  }
  if (tamper)
    for (int i : in.participants) tamper(i, in.tau[i]);
  return in;
}

// Everybody declined to run: flat fee, no outcome to price against.
SettlementReport all_quit_report(const StrategyProfile& strategy, double p_bar) {
  SettlementReport r;
  r.all_quit = true;
  for (int i = 0; i < strategy.size(); ++i) {
    r.payments[i] = p_bar;
    r.penalties[i] = 0.0;
    r.e_terms[i] = 0.0;
    r.payoffs[i] = -p_bar;
  }
  return r;
}

void fill_payoffs(SettlementReport& r, const StrategyProfile& strategy,
                  const std::vector<EvaluationFunction>& true_costs) {
  for (int i = 0; i < strategy.size(); ++i) {
    if (!r.payments.count(i)) r.payments[i] = 0.0;
    if (!r.penalties.count(i)) r.penalties[i] = 0.0;
    if (!r.e_terms.count(i)) r.e_terms[i] = 0.0;
    r.payoffs[i] = -true_costs.at(i).value(r.o_star) - r.payments.at(i);
  }
}

}  // namespace

std::vector<MessageBundle> make_bundles(const std::vector<SequenceTrace>& traces) {
  const SequenceTrace* social = nullptr;
  for (const auto& t : traces)
    if (t.excluded == -1) social = &t;
  if (!social) throw std::invalid_argument("make_bundles: social sequence missing");
  std::vector<MessageBundle> bundles;
  for (int i : social->participants) {
    MessageBundle b;
    b.agent = i;
    b.final_social = social->states.back().at(i);
    for (const auto& t : traces)
      if (t.excluded != -1 && t.excluded != i) b.final_leave_one_out[t.excluded] =
          t.states.back().at(i);
    bundles.push_back(std::move(b));
  }
  return bundles;
}

Vector component_median(const std::vector<Vector>& points) {
  if (points.empty()) throw std::invalid_argument("median of nothing");
  const int n = static_cast<int>(points[0].size());
  Vector out(n);
  std::vector<double> coord(points.size());
  for (int c = 0; c < n; ++c) {
    for (size_t k = 0; k < points.size(); ++k) coord[k] = points[k](c);
    std::sort(coord.begin(), coord.end());
    const size_t m = coord.size();
    out(c) = (m % 2) ? coord[m / 2] : 0.5 * (coord[m / 2 - 1] + coord[m / 2]);
  }
  return out;
}

Outcomes select_outcomes(const std::vector<MessageBundle>& bundles) {
  if (bundles.empty()) throw std::invalid_argument("select_outcomes: no participants");
  Outcomes out;
  std::vector<Vector> socials;
  for (const auto& b : bundles) socials.push_back(b.final_social);
  out.o_star = component_median(socials);
  if (bundles.size() < 2) return out;  // sequence outcomes undefined for one participant
  for (const auto& bi : bundles) {
    std::vector<Vector> finals;
    for (const auto& bj : bundles)
      if (bj.agent != bi.agent) finals.push_back(bj.final_leave_one_out.at(bi.agent));
    out.o_seq[bi.agent] = component_median(finals);
  }
  return out;
}

std::pair<Vector, std::vector<double>> vcg_payment_centralized(
    const std::vector<EvaluationFunction>& evals, const FeasibleSet& X) {
  std::vector<const EvaluationFunction*> all;
  for (const auto& f : evals) all.push_back(&f);
  Vector o_star = minimize_sum(all, X);
  std::vector<double> p(evals.size(), 0.0);
  if (evals.size() > 1) {
    for (size_t i = 0; i < evals.size(); ++i) {
      std::vector<const EvaluationFunction*> others;
      for (size_t j = 0; j < evals.size(); ++j)
        if (j != i) others.push_back(&evals[j]);
      Vector rest_opt = minimize_sum(others, X);
      p[i] = sum_values(others, o_star) - sum_values(others, rest_opt);
    }
  }
  return {o_star, p};
}

SettlementReport settle_devcg(const std::vector<MessageBundle>& bundles,
                              const StrategyProfile& strategy,
                              const std::vector<EvaluationFunction>& true_costs, int k_f,
                              double p_bar, const TauTamper& tamper) {
  (void)k_f;
  if (static_cast<int>(true_costs.size()) != strategy.size())
    throw std::invalid_argument("settlement: true costs do not match the profile");
  SettlementInputs in = prepare(bundles, strategy, tamper);
  if (in.participants.empty()) return all_quit_report(strategy, p_bar);
  SettlementReport r;
  r.participants = in.participants;
  r.o_star = in.outcomes.o_star;
  r.o_seq = in.outcomes.o_seq;
  r.payments = base_payments(in.participants, in.tau);
  fill_payoffs(r, strategy, true_costs);
  return r;
}

SettlementReport settle_devcg_g(const std::vector<MessageBundle>& bundles,
                                const StrategyProfile& strategy,
                                const std::vector<EvaluationFunction>& true_costs,
                                const std::vector<SequenceTrace>& traces, int k_s, int k_f,
                                double p_bar, const TauTamper& tamper) {
  if (static_cast<int>(true_costs.size()) != strategy.size())
    throw std::invalid_argument("settlement: true costs do not match the profile");
  SettlementInputs in = prepare(bundles, strategy, tamper);
  if (in.participants.empty()) return all_quit_report(strategy, p_bar);
  SettlementReport r;
  r.participants = in.participants;
  r.o_star = in.outcomes.o_star;
  r.o_seq = in.outcomes.o_seq;
  r.payments = base_payments(in.participants, in.tau);

  const SequenceTrace* social = nullptr;
  for (const auto& t : traces)
    if (t.excluded == -1) social = &t;
  if (!social) throw std::invalid_argument("settlement: social sequence missing");

  for (int i : in.participants) {
    InterleavedStream stream = interleave(traces, i, k_s, k_f);
    FilterState fs = filter_stream(stream);
    const Vector g_final = social->gradients.back().at(i);
    double proposal_gap = 0.0;
    for (int j : in.invited) {
      if (j == i) continue;
      const Vector& oj =
          in.outcomes.o_seq.count(j) ? in.outcomes.o_seq.at(j) : in.outcomes.o_star;
      double gap = in.tau.at(i).at(j) - in.tau.at(i).at(-1) - g_final.dot(oj - r.o_star);
      proposal_gap += std::min(0.0, gap);
    }
    const double e = fs.repair_magnitude - proposal_gap;
    r.e_terms[i] = e;
    if (e != 0.0) {
      const double pi = k_f * e + 1.0;
      r.penalties[i] = pi;
      r.payments[i] += pi;
    }
  }
  fill_payoffs(r, strategy, true_costs);
  return r;
}

void write_settlement_json(std::ostream& out, const SettlementReport& r) {
  nlohmann::ordered_json j;
  j["participants"] = r.participants;
  j["o_star"] = std::vector<double>(r.o_star.begin(), r.o_star.end());
  nlohmann::ordered_json seq = nlohmann::ordered_json::object();
  for (const auto& [i, v] : r.o_seq) seq[std::to_string(i)] = std::vector<double>(v.begin(), v.end());
  j["o_seq"] = seq;
  auto table = [](const std::map<int, double>& m) {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (const auto& [i, v] : m) o[std::to_string(i)] = v;
    return o;
  };
  j["payments"] = table(r.payments);
  j["penalties"] = table(r.penalties);
  j["e_terms"] = table(r.e_terms);
  j["payoffs"] = table(r.payoffs);
  j["quit"] = r.all_quit;
  out << j.dump(2) << '\n';
}

}  // namespace mechsim
