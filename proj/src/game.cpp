#include "mechsim/game.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace mechsim {

namespace {

int draw_k_s(const GameEnvironment& env, unsigned seed_offset) {
  std::mt19937 rng(env.seed ^ (0x9e3779b9u * (seed_offset + 1u)));
  int lo = std::max(0, env.k_f - env.k_s_window);
  return lo + static_cast<int>(rng() % static_cast<unsigned>(env.k_f - lo));
}

}  // namespace

SimulationResult simulate(const GameEnvironment& env, const StrategyProfile& profile,
                          MechanismKind kind, unsigned seed_offset) {
  if (static_cast<int>(env.true_costs.size()) != profile.size())
    throw std::invalid_argument("simulate: true costs do not match the profile");
  SimulationResult res;
  res.k_s = draw_k_s(env, seed_offset);
  std::vector<int> participants = profile.participants();
  if (participants.empty()) {
    res.report = kind == MechanismKind::devcg
                     ? settle_devcg({}, profile, env.true_costs, env.k_f, env.p_bar)
                     : settle_devcg_g({}, profile, env.true_costs, {}, res.k_s, env.k_f,
                                      env.p_bar);
    return res;
  }
  auto x0 = default_initial_states(participants, env.X);
  res.traces = run_all_sequences(env.graph, profile, env.X, x0, env.k_f, env.step,
                                 env.parallel_sequences);
  auto bundles = make_bundles(res.traces);
  res.report = kind == MechanismKind::devcg
                   ? settle_devcg(bundles, profile, env.true_costs, env.k_f, env.p_bar)
                   : settle_devcg_g(bundles, profile, env.true_costs, res.traces, res.k_s,
                                    env.k_f, env.p_bar);
  res.epsilon = measured_epsilon(res.traces, env.true_costs, env.step);
  return res;
}

std::map<int, double> payoff(const GameEnvironment& env, const StrategyProfile& profile,
                             MechanismKind kind) {
  return simulate(env, profile, kind).report.payoffs;
}

double measured_epsilon(const std::vector<SequenceTrace>& traces,
                        const std::vector<EvaluationFunction>& true_costs,
                        const StepRule& rule) {
  double eps = 0.0;
  for (const auto& t : traces) {
    double d = disagreement(t, t.k_f, rule);
    double grad_total = 0.0, curvature = 0.0;
    for (int p : t.participants) {
      grad_total += t.gradients.back().at(p).norm();
      curvature += true_costs.at(p).smoothness();
    }
    eps += d * (grad_total + curvature * d);
  }
  return eps;
}

long GridGame::total_cells() const {
  if (options.empty()) return 0;
  long n = 1;
  for (const auto& menu : options) n *= static_cast<long>(menu.size());
  return n;
}

long GridGame::flat_index(const std::vector<int>& idx) const {
  if (idx.size() != options.size()) throw std::invalid_argument("grid index arity mismatch");
  long f = 0;
  for (size_t a = 0; a < options.size(); ++a) {
    if (idx[a] < 0 || idx[a] >= static_cast<int>(options[a].size()))
      throw std::out_of_range("grid index out of range");
    f = f * static_cast<long>(options[a].size()) + idx[a];
  }
  return f;
}

std::vector<int> GridGame::cell_at(long flat) const {
  std::vector<int> idx(options.size(), 0);
  for (size_t a = options.size(); a-- > 0;) {
    long sz = static_cast<long>(options[a].size());
    idx[a] = static_cast<int>(flat % sz);
    flat /= sz;
  }
  return idx;
}

StrategyProfile GridGame::profile_at(const std::vector<int>& idx) const {
  if (idx.size() != options.size()) throw std::invalid_argument("grid index arity mismatch");
  StrategyProfile p;
  for (size_t a = 0; a < options.size(); ++a) p.agents.push_back(options[a][idx[a]].strategy);
  return p;
}

GridGame make_grid(std::vector<std::vector<StrategyOption>> options,
                   std::vector<int> truthful_index) {
  if (options.empty()) throw std::invalid_argument("grid needs at least one agent");
  if (truthful_index.size() != options.size())
    throw std::invalid_argument("one truthful index per agent required");
  for (size_t a = 0; a < options.size(); ++a) {
    if (options[a].empty()) throw std::invalid_argument("empty strategy menu");
    if (truthful_index[a] < 0 || truthful_index[a] >= static_cast<int>(options[a].size()))
      throw std::invalid_argument("truthful index out of range");
  }
  GridGame g;
  g.options = std::move(options);
  g.truthful_index = std::move(truthful_index);
  return g;
}

void fill_grid(GridGame& game, const GameEnvironment& env, MechanismKind kind, int jobs) {
  const long total = game.total_cells();
  if (total > 1000000)
    throw std::runtime_error("grid too large to fill: " + std::to_string(total) + " cells");
  game.payoffs.assign(total, {});
  game.epsilons.assign(total, 0.0);
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (long c = next.fetch_add(1); c < total; c = next.fetch_add(1)) {
      try {
        SimulationResult r =
            simulate(env, game.profile_at(game.cell_at(c)), kind, static_cast<unsigned>(c));
        auto& row = game.payoffs[c];
        row.resize(env.true_costs.size());
        for (size_t i = 0; i < row.size(); ++i) row[i] = r.report.payoffs.at(static_cast<int>(i));
        game.epsilons[c] = r.epsilon;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  jobs = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  game.filled = true;
}

BestResponse best_response(const GridGame& game, int agent, const std::vector<int>& at) {
  if (!game.filled) throw std::logic_error("payoff tensor not filled");
  if (agent < 0 || agent >= game.num_agents()) throw std::out_of_range("no such agent");
  std::vector<int> idx = at;
  const int n_opts = static_cast<int>(game.options[agent].size());
  double best = -std::numeric_limits<double>::infinity();
  for (int o = 0; o < n_opts; ++o) {
    idx[agent] = o;
    best = std::max(best, game.payoffs[game.flat_index(idx)][agent]);
  }
  const double tol = 1e-9 * std::max(1.0, std::abs(best));
  auto value_of = [&](int o) {
    idx[agent] = o;
    return game.payoffs[game.flat_index(idx)][agent];
  };
  int chosen = -1;
  if (value_of(game.truthful_index[agent]) >= best - tol) {
    chosen = game.truthful_index[agent];
  } else {
    for (int o = 0; o < n_opts; ++o)
      if (value_of(o) >= best - tol) {
        chosen = o;
        break;
      }
  }
  return {chosen, game.options[agent][chosen].label, value_of(chosen)};
}

DseVerdict epsilon_dse_check(const GridGame& game, const std::vector<int>& candidate,
                             double eps) {
  if (!game.filled) throw std::logic_error("payoff tensor not filled");
  DseVerdict v;
  bool any = false;
  const long total = game.total_cells();
  for (int a = 0; a < game.num_agents(); ++a) {
    for (long c = 0; c < total; ++c) {
      std::vector<int> idx = game.cell_at(c);
      if (idx[a] != candidate[a]) continue;
      const double u0 = game.payoffs[c][a];
      for (int o = 0; o < static_cast<int>(game.options[a].size()); ++o) {
        if (o == candidate[a]) continue;
        std::vector<int> dev = idx;
        dev[a] = o;
        const double gain = game.payoffs[game.flat_index(dev)][a] - u0;
        if (!any || gain > v.worst_gain) {
          any = true;
          v.worst_gain = gain;
          v.worst = DseViolation{a, idx, o, gain};
        }
      }
    }
  }
  if (!any) v.worst_gain = 0.0;
  v.pass = !(v.worst_gain > eps);
  return v;
}

std::vector<std::vector<int>> brute_force_nash(const GridGame& game, double tol) {
  if (!game.filled) throw std::logic_error("payoff tensor not filled");
  const long total = game.total_cells();
  if (total > 1000000)
    throw std::runtime_error("equilibrium search too large: " + std::to_string(total) +
                             " cells");
  std::vector<std::vector<int>> equilibria;
  for (long c = 0; c < total; ++c) {
    const std::vector<int> idx = game.cell_at(c);
    double total_payoff = 0.0;
    for (double u : game.payoffs[c]) total_payoff += u;
    bool stable = true;
    for (int a = 0; a < game.num_agents() && stable; ++a) {
      const double u0 = game.payoffs[c][a];
      const double others0 = total_payoff - u0;
      for (int o = 0; o < static_cast<int>(game.options[a].size()); ++o) {
        if (o == idx[a]) continue;
        std::vector<int> dev = idx;
        dev[a] = o;
        const auto& row = game.payoffs[game.flat_index(dev)];
        const double u1 = row[a];
        double others1 = 0.0;
        for (int j = 0; j < game.num_agents(); ++j)
          if (j != a) others1 += row[j];
        const bool improves =
            u1 > u0 + tol || (std::abs(u1 - u0) <= tol && others1 < others0 - tol);
        if (improves) {
          stable = false;
          break;
        }
      }
    }
    if (stable) equilibria.push_back(idx);
  }
  return equilibria;
}

BandCheckReport maliciousness_bound_check(const StrategyProfile& profile,
                                          const SettlementReport& report,
                                          const std::vector<EvaluationFunction>& true_costs,
                                          double eps) {
  BandCheckReport rep;
  if (report.all_quit) return rep;
  for (int i : report.participants) {
    const AgentStrategy& s = profile.agents.at(i);
    for (const auto& [j, f] : s.sequence_overrides)
      if (!s.shifts.count(j))
        throw std::invalid_argument("band check requires shifted-family declarations");
    const double f_star = true_costs.at(i).value(report.o_star);
    const Vector g_star = true_costs.at(i).gradient(report.o_star);
    for (const auto& [j, c] : s.shifts) {
      if (j == i) continue;
      const Vector& oj = report.o_seq.count(j) ? report.o_seq.at(j) : report.o_star;
      const double lower =
          f_star + g_star.dot(oj - report.o_star) - true_costs.at(i).value(oj);
      rep.rows.push_back({i, j, c, lower});
      rep.worst_band_violation = std::max(rep.worst_band_violation, lower - c);
    }
    if (report.o_seq.count(i)) {
      double sum_in = 0.0;
      for (int j : report.participants) {
        if (j == i) continue;
        const auto& shifts = profile.agents.at(j).shifts;
        if (auto it = shifts.find(i); it != shifts.end()) sum_in += it->second;
      }
      double rhs = 0.0;
      for (const auto& f : true_costs)
        rhs += f.value(report.o_seq.at(i)) - f.value(report.o_star);
      rep.worst_aggregate_violation =
          std::max(rep.worst_aggregate_violation, std::abs(sum_in) - rhs);
    }
  }
  rep.worst_band_violation = std::max(rep.worst_band_violation, 0.0);
  rep.worst_aggregate_violation = std::max(rep.worst_aggregate_violation, 0.0);
  rep.pass = rep.worst_band_violation <= eps && rep.worst_aggregate_violation <= eps;
  return rep;
}

void write_grid_csv(std::ostream& out, const GridGame& game) {
  if (!game.filled) throw std::logic_error("payoff tensor not filled");
  for (int a = 0; a < game.num_agents(); ++a) out << 'i' << a << ',';
  out << "agent,payoff\n";
  char buf[64];
  const long total = game.total_cells();
  for (long c = 0; c < total; ++c) {
    const std::vector<int> idx = game.cell_at(c);
    for (size_t a = 0; a < game.payoffs[c].size(); ++a) {
      for (int v : idx) out << v << ',';
      std::snprintf(buf, sizeof buf, "%.17g", game.payoffs[c][a]);
      out << a << ',' << buf << '\n';
    }
  }
}

}  // namespace mechsim
