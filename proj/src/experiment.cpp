#include "mechsim/experiment.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "mechsim/filter.hpp"
#include "mechsim/mechanism.hpp"

namespace mechsim {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr double kMaliciousShift = -1e6;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double map_get(const std::map<int, double>& m, int key) {
  auto it = m.find(key);
  return it == m.end() ? 0.0 : it->second;
}

// One simulation to run: a strategy profile plus its sweep coordinates and,
// for sweep experiments, a pinned single-cell config for the manifest.
struct Cell {
  std::vector<double> coords;
  StrategyProfile profile;
  unsigned seed_offset = 0;
  bool has_rerun_config = false;
  ExperimentConfig rerun_config;
};

struct CellResult {
  SettlementReport report;
  double epsilon = 0.0;
  int k_s = 0;
};

struct Plan {
  std::vector<std::string> columns;  // sweep coordinate column names
  std::vector<Cell> cells;
  std::vector<std::vector<std::string>> menu_labels;  // equilibrium search only
};

StrategyProfile truthful_profile(const std::vector<EvaluationFunction>& costs) {
  StrategyProfile profile;
  for (const auto& f : costs) profile.agents.push_back(AgentStrategy::truthful(f));
  return profile;
}

// The declaration family swept by the declaration-scale experiment: the
// agent's cost rebuilt with its headline weight scaled.
EvaluationFunction scaled_declaration(const ScenarioConfig& s, int agent, double scale) {
  if (s.type == "ev") return ev_declared_cost(s.ev, agent, s.ev.alpha[agent] * scale);
  return EvaluationFunction::parabola(s.synthetic.a[agent] * scale, s.synthetic.m[agent], 0.0);
}

ExperimentConfig pinned(const ExperimentConfig& cfg, double value, int agent) {
  ExperimentConfig cell = cfg;
  cell.sweep.values = {value};
  cell.sweep.agent = agent;
  return cell;
}

Plan plan_tisi(const ExperimentConfig& cfg, const std::vector<EvaluationFunction>& costs) {
  Plan plan;
  plan.columns = {"deviator", "alpha_scale"};
  std::vector<int> deviators;
  if (cfg.sweep.agent >= 0)
    deviators = {cfg.sweep.agent};
  else
    for (int i = 0; i < static_cast<int>(costs.size()); ++i) deviators.push_back(i);
  for (int a : deviators)
    for (double s : cfg.sweep.values) {
      Cell cell;
      cell.coords = {static_cast<double>(a), s};
      cell.profile = truthful_profile(costs);
      if (s != 1.0)
        cell.profile.agents[a] = AgentStrategy::truthful(scaled_declaration(cfg.scenario, a, s));
      cell.has_rerun_config = true;
      cell.rerun_config = pinned(cfg, s, a);
      plan.cells.push_back(std::move(cell));
    }
  return plan;
}

Plan plan_tisd(const ExperimentConfig& cfg) {
  const EvParams& p = cfg.scenario.ev;
  const int target = cfg.sweep.agent >= 0 ? cfg.sweep.agent : 0;
  Plan plan;
  plan.columns = {"range"};
  for (double range : cfg.sweep.values) {
    // One row of sequence-dependent weights; everyone else stays truthful.
    // The draw depends on the seed alone, so deviations scale continuously
    // across ranges.
    auto table = tisd_perturbation(p.alpha, range, cfg.seed);
    for (int i = 0; i < p.agents; ++i)
      if (i != target) table[i].assign(p.agents, p.alpha[i]);
    Cell cell;
    cell.coords = {range};
    cell.profile = tisd_profile(p, table);
    cell.has_rerun_config = true;
    cell.rerun_config = pinned(cfg, range, target);
    plan.cells.push_back(std::move(cell));
  }
  return plan;
}

Plan plan_malice(const ExperimentConfig& cfg, const std::vector<EvaluationFunction>& costs) {
  const int n = static_cast<int>(costs.size());
  const int target = cfg.sweep.agent >= 0 ? cfg.sweep.agent : 0;
  Plan plan;
  plan.columns = {"gamma_shift"};
  for (double shift : cfg.sweep.values) {
    Cell cell;
    cell.coords = {shift};
    cell.profile = truthful_profile(costs);
    if (shift != 0.0)
      for (int j = 0; j < n; ++j)
        if (j != target) cell.profile.agents[target].set_shift(j, shift);
    cell.has_rerun_config = true;
    cell.rerun_config = pinned(cfg, shift, target);
    plan.cells.push_back(std::move(cell));
  }
  return plan;
}

GridGame equilibrium_grid(const std::vector<EvaluationFunction>& costs) {
  const int n = static_cast<int>(costs.size());
  std::vector<std::vector<StrategyOption>> menus(n);
  for (int i = 0; i < n; ++i) {
    AgentStrategy shifted = AgentStrategy::truthful(costs[i]);
    for (int j = 0; j < n; ++j)
      if (j != i) shifted.set_shift(j, kMaliciousShift);
    menus[i] = {{"truthful", AgentStrategy::truthful(costs[i])},
                {"quit", AgentStrategy::quit()},
                {"shifted", std::move(shifted)}};
  }
  return make_grid(std::move(menus), std::vector<int>(n, 0));
}

Plan plan_equilibrium(const GridGame& grid) {
  Plan plan;
  for (int i = 0; i < grid.num_agents(); ++i) plan.columns.push_back("i" + std::to_string(i));
  plan.menu_labels.resize(grid.num_agents());
  for (int i = 0; i < grid.num_agents(); ++i)
    for (const StrategyOption& opt : grid.options[i]) plan.menu_labels[i].push_back(opt.label);
  const long total = grid.total_cells();
  for (long c = 0; c < total; ++c) {
    std::vector<int> idx = grid.cell_at(c);
    Cell cell;
    for (int v : idx) cell.coords.push_back(static_cast<double>(v));
    cell.profile = grid.profile_at(idx);
    cell.seed_offset = static_cast<unsigned>(c);  // matches the grid filler
    plan.cells.push_back(std::move(cell));
  }
  return plan;
}

std::vector<CellResult> execute(const GameEnvironment& env, MechanismKind kind,
                                const std::vector<Cell>& cells, int jobs) {
  std::vector<CellResult> results(cells.size());
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      long c = next.fetch_add(1);
      if (c >= static_cast<long>(cells.size())) return;
      try {
        SimulationResult sim = simulate(env, cells[c].profile, kind, cells[c].seed_offset);
        results[c] = CellResult{std::move(sim.report), sim.epsilon, sim.k_s};
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::string settlement_name(size_t index) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "settlement_%03zu.json", index);
  return buf;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExperimentError("cannot write " + path.string());
  out << body;
  if (!out.flush()) throw ExperimentError("failed writing " + path.string());
}

void write_results_csv(const fs::path& dir, const Plan& plan,
                       const std::vector<CellResult>& results) {
  std::string csv;
  for (const std::string& c : plan.columns) csv += c + ',';
  csv += "agent,payoff,payment,penalty\n";
  for (size_t c = 0; c < plan.cells.size(); ++c) {
    std::string prefix;
    for (double v : plan.cells[c].coords) prefix += fmt(v) + ',';
    const SettlementReport& r = results[c].report;
    for (const auto& [agent, payoff] : r.payoffs)
      csv += prefix + std::to_string(agent) + ',' + fmt(payoff) + ',' +
             fmt(map_get(r.payments, agent)) + ',' + fmt(map_get(r.penalties, agent)) + '\n';
  }
  write_file(dir / "results.csv", csv);
}

void write_settlements(const fs::path& dir, const std::vector<CellResult>& results) {
  for (size_t c = 0; c < results.size(); ++c) {
    std::ofstream out(dir / settlement_name(c), std::ios::binary);
    if (!out) throw ExperimentError("cannot write " + (dir / settlement_name(c)).string());
    write_settlement_json(out, results[c].report);
  }
}

ordered_json manifest_base(const ExperimentConfig& cfg, const Plan& plan,
                           const std::vector<CellResult>& results) {
  ordered_json manifest;
  manifest["experiment"] = cfg.experiment;
  manifest["seed"] = cfg.seed;
  manifest["config"] = ordered_json::parse(echo_config(cfg));
  ordered_json columns = ordered_json::array();
  for (const std::string& c : plan.columns) columns.push_back(c);
  for (const char* c : {"agent", "payoff", "payment", "penalty"}) columns.push_back(c);
  manifest["columns"] = columns;
  ordered_json cells = ordered_json::array();
  for (size_t c = 0; c < plan.cells.size(); ++c) {
    ordered_json cell;
    cell["index"] = c;
    ordered_json coords = ordered_json::object();
    for (size_t k = 0; k < plan.columns.size(); ++k) coords[plan.columns[k]] = plan.cells[c].coords[k];
    cell["coords"] = coords;
    cell["seed_offset"] = plan.cells[c].seed_offset;
    cell["k_s"] = results[c].k_s;
    cell["epsilon"] = results[c].epsilon;
    cell["settlement"] = settlement_name(c);
    if (plan.cells[c].has_rerun_config)
      cell["config"] = ordered_json::parse(echo_config(plan.cells[c].rerun_config));
    cells.push_back(std::move(cell));
  }
  manifest["cells"] = cells;
  return manifest;
}

void run_cells(const ExperimentConfig& cfg, const GameEnvironment& env, Plan&& plan,
               const fs::path& dir, int jobs, std::ostream& log, GridGame* grid) {
  log << "planned " << plan.cells.size() << " cells\n";
  std::vector<CellResult> results = execute(env, cfg.mechanism, plan.cells, jobs);
  log << "simulated " << plan.cells.size() << " cells\n";

  write_results_csv(dir, plan, results);
  write_settlements(dir, results);

  ordered_json manifest = manifest_base(cfg, plan, results);
  if (grid) {
    grid->payoffs.assign(results.size(), std::vector<double>(grid->num_agents(), 0.0));
    grid->epsilons.assign(results.size(), 0.0);
    for (size_t c = 0; c < results.size(); ++c) {
      for (int a = 0; a < grid->num_agents(); ++a)
        grid->payoffs[c][a] = map_get(results[c].report.payoffs, a);
      grid->epsilons[c] = results[c].epsilon;
    }
    grid->filled = true;
    ordered_json menus = ordered_json::array();
    for (const auto& labels : plan.menu_labels) {
      ordered_json menu = ordered_json::array();
      for (const std::string& l : labels) menu.push_back(l);
      menus.push_back(std::move(menu));
    }
    manifest["options"] = menus;
    ordered_json equilibria = ordered_json::array();
    for (const auto& idx : brute_force_nash(*grid)) equilibria.push_back(idx);
    manifest["equilibria"] = equilibria;
    log << "found " << equilibria.size() << " equilibria\n";
  }
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  log << "wrote results.csv, " << results.size() << " settlement files, manifest.json\n";
}

// Truthful run plus per-agent repair logs: one honest pass (clean streams
// pass through untouched) and one with a forged late gradient.
void run_filter_demo(const ExperimentConfig& cfg, const GameEnvironment& env, const fs::path& dir,
                     std::ostream& log) {
  StrategyProfile profile = truthful_profile(env.true_costs);
  SimulationResult sim = simulate(env, profile, cfg.mechanism, 0);
  log << "simulated truthful run (k_s = " << sim.k_s << ")\n";

  size_t social = sim.traces.size();
  for (size_t s = 0; s < sim.traces.size(); ++s)
    if (sim.traces[s].excluded == -1) social = s;
  if (social == sim.traces.size()) throw ExperimentError("run is missing its social sequence");

  const int dim = env.X.dimension();
  std::string honest = "agent,t,sequence,repair,pass_through\n";
  std::string tampered = honest;
  std::string summary = "agent,condition,entries,repaired_entries,repair_magnitude\n";
  auto append_rows = [](std::string& csv, const InterleavedStream& stream, const FilterState& fs) {
    for (int t = 0; t < stream.size(); ++t)
      csv += std::to_string(stream.agent) + ',' + std::to_string(t) + ',' +
             std::to_string(stream.origin[t]) + ',' + fmt(fs.step_repair[t]) + ',' +
             std::to_string(int(fs.passed_through[t])) + '\n';
  };
  auto summarize = [&](int agent, const char* condition, const FilterState& fs) {
    int repaired = 0;
    for (char p : fs.passed_through)
      if (!p) ++repaired;
    summary += std::to_string(agent) + ',' + condition + ',' +
               std::to_string(fs.step_repair.size()) + ',' + std::to_string(repaired) + ',' +
               fmt(fs.repair_magnitude) + '\n';
  };

  for (int a : sim.report.participants) {
    InterleavedStream clean = interleave(sim.traces, a, sim.k_s, cfg.k_f);
    FilterState clean_fs = filter_stream(clean);
    append_rows(honest, clean, clean_fs);
    summarize(a, "honest", clean_fs);

    std::vector<SequenceTrace> forged = sim.traces;
    forged[social].gradients[cfg.k_f - 1][a] = Vector::Constant(dim, 1000.0);
    InterleavedStream bad = interleave(forged, a, sim.k_s, cfg.k_f);
    FilterState bad_fs = filter_stream(bad);
    append_rows(tampered, bad, bad_fs);
    summarize(a, "tampered", bad_fs);
  }
  write_file(dir / "repairs_honest.csv", honest);
  write_file(dir / "repairs_tampered.csv", tampered);

  // Settlement artifacts for the run itself, same shape as the other
  // experiments.
  Plan plan;
  Cell cell;
  cell.profile = std::move(profile);
  plan.cells.push_back(std::move(cell));
  std::vector<CellResult> results;
  results.push_back(CellResult{std::move(sim.report), sim.epsilon, sim.k_s});
  write_results_csv(dir, plan, results);
  write_settlements(dir, results);
  write_file(dir / "repair_summary.csv", summary);
  ordered_json manifest = manifest_base(cfg, plan, results);
  manifest["repair_logs"] = {"repairs_honest.csv", "repairs_tampered.csv", "repair_summary.csv"};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  log << "wrote results.csv, repair logs, manifest.json\n";
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, int jobs,
                    std::ostream& log) {
  if (jobs < 1) throw ExperimentError("jobs must be at least 1");
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ExperimentError("cannot create output directory " + dir.string());

  GameEnvironment env = build_environment(cfg);
  log << "experiment " << cfg.experiment << ": " << env.true_costs.size() << " agents, k_f = "
      << cfg.k_f << "\n";

  if (cfg.experiment == "tisi-sweep") {
    run_cells(cfg, env, plan_tisi(cfg, env.true_costs), dir, jobs, log, nullptr);
  } else if (cfg.experiment == "tisd-range-sweep") {
    run_cells(cfg, env, plan_tisd(cfg), dir, jobs, log, nullptr);
  } else if (cfg.experiment == "malice-sweep") {
    run_cells(cfg, env, plan_malice(cfg, env.true_costs), dir, jobs, log, nullptr);
  } else if (cfg.experiment == "equilibrium-search") {
    GridGame grid = equilibrium_grid(env.true_costs);
    run_cells(cfg, env, plan_equilibrium(grid), dir, jobs, log, &grid);
  } else if (cfg.experiment == "filter-demo") {
    run_filter_demo(cfg, env, dir, log);
  } else {
    throw ExperimentError("unknown experiment: " + cfg.experiment);
  }
}

}  // namespace mechsim
