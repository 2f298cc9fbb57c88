#include "mechsim/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace mechsim {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct ErrorList {
  std::vector<std::string> lines;
  void add(const std::string& path, const std::string& problem) {
    lines.push_back(path + ": " + problem);
  }
  void raise_if_any() const {
    if (lines.empty()) return;
    std::string msg;
    for (size_t i = 0; i < lines.size(); ++i) {
      if (i) msg += '\n';
      msg += lines[i];
    }
    throw ConfigError(msg);
  }
};

// Checked access to one JSON object level: typed reads plus unknown-key
// detection, with every defect recorded under its config path.
class Level {
 public:
  Level(const json& node, std::string path, ErrorList& errors)
      : node_(node), path_(std::move(path)), errors_(errors) {
    if (!node_.is_object()) errors_.add(path_, "expected an object");
  }

  bool has(const char* key) {
    seen_.push_back(key);
    return node_.is_object() && node_.contains(key);
  }

  void number(const char* key, double& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number()) return errors_.add(at(key), "expected a number");
    out = v.get<double>();
  }

  void integer(const char* key, int& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number_integer()) return errors_.add(at(key), "expected an integer");
    out = v.get<int>();
  }

  void unsigned_integer(const char* key, unsigned& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
      return errors_.add(at(key), "expected a non-negative integer");
    out = static_cast<unsigned>(v.get<long long>());
  }

  void text(const char* key, std::string& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_string()) return errors_.add(at(key), "expected a string");
    out = v.get<std::string>();
  }

  void numbers(const char* key, std::vector<double>& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_array() || !std::all_of(v.begin(), v.end(),
                                      [](const json& e) { return e.is_number(); }))
      return errors_.add(at(key), "expected an array of numbers");
    out = v.get<std::vector<double>>();
  }

  const json* object(const char* key) {
    if (!has(key)) return nullptr;
    const json& v = node_.at(key);
    if (!v.is_object()) {
      errors_.add(at(key), "expected an object");
      return nullptr;
    }
    return &v;
  }

  std::string at(const char* key) const { return path_ + "." + key; }

  void finish() {
    if (!node_.is_object()) return;
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
        errors_.add(path_ + "." + it.key(), "unknown key");
  }

 private:
  const json& node_;
  std::string path_;
  ErrorList& errors_;
  std::vector<std::string> seen_;
};

void read_scenario(const json& node, ScenarioConfig& out, ErrorList& errors) {
  Level level(node, "scenario", errors);
  level.text("type", out.type);
  if (out.type == "ev") {
    out.ev = desk_ev_params();
    EvParams& p = out.ev;
    level.integer("agents", p.agents);
    level.integer("slots", p.slots);
    level.number("delta_t", p.delta_t);
    level.number("beta", p.beta);
    level.number("base_price", p.base_price);
    level.number("degradation", p.degradation);
    level.number("battery_capacity", p.battery_capacity);
    level.number("max_soc", p.max_soc);
    level.numbers("alpha", p.alpha);
    level.numbers("gamma", p.gamma);
    level.numbers("initial_soc", p.initial_soc);
    level.numbers("demand", p.demand);
    level.number("x_max", p.x_max);
    level.finish();
    if (p.beta <= 0.0) errors.add("scenario.beta", "must be positive");
    try {
      build_ev_instance(p);
    } catch (const std::invalid_argument& e) {
      errors.add("scenario", e.what());
    }
  } else if (out.type == "synthetic") {
    SyntheticParams& p = out.synthetic;
    level.numbers("a", p.a);
    level.numbers("m", p.m);
    level.number("lo", p.lo);
    level.number("hi", p.hi);
    level.finish();
    try {
      build_synthetic_instance(p);
    } catch (const std::invalid_argument& e) {
      errors.add("scenario", e.what());
    }
  } else {
    level.finish();
    errors.add("scenario.type", "expected \"ev\" or \"synthetic\"");
  }
}

void read_graph(const json& node, GraphConfig& out, ErrorList& errors) {
  if (node.is_string()) {
    out.kind = node.get<std::string>();
    if (out.kind != "complete" && out.kind != "ring")
      errors.add("graph", "expected \"complete\", \"ring\", or {\"edges\": [...]}");
    return;
  }
  Level level(node, "graph", errors);
  out.kind = "edges";
  if (level.has("edges")) {
    const json& v = node.at("edges");
    bool ok = v.is_array();
    if (ok)
      for (const json& e : v)
        ok = ok && e.is_array() && e.size() == 2 && e[0].is_number_integer() &&
             e[1].is_number_integer();
    if (!ok) {
      errors.add("graph.edges", "expected an array of [i, j] pairs");
    } else {
      for (const json& e : v) out.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
  } else {
    errors.add("graph.edges", "required for an explicit edge list");
  }
  level.finish();
}

void read_sweep(const json& node, SweepConfig& out, ErrorList& errors) {
  Level level(node, "sweep", errors);
  level.text("parameter", out.parameter);
  level.numbers("values", out.values);
  level.integer("agent", out.agent);
  level.finish();
}

const char* mechanism_name(MechanismKind kind) {
  return kind == MechanismKind::devcg ? "devcg" : "devcg-g";
}

int scenario_agents(const ScenarioConfig& s) {
  return s.type == "ev" ? s.ev.agents : static_cast<int>(s.synthetic.a.size());
}

// Per experiment: the sweep parameter it expects (nullptr = sweep forbidden).
const char* expected_parameter(const std::string& experiment) {
  if (experiment == "tisi-sweep") return "alpha_scale";
  if (experiment == "tisd-range-sweep") return "range";
  if (experiment == "malice-sweep") return "gamma_shift";
  return nullptr;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "tisi-sweep", "tisd-range-sweep", "malice-sweep", "equilibrium-search", "filter-demo"};
  return names;
}

bool is_sweep_experiment(const std::string& name) {
  return expected_parameter(name) != nullptr;
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // Count lines up to the failing byte so the message points at the spot.
    size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    long line = 1 + std::count(text.begin(), text.begin() + std::min(byte, text.size()), '\n');
    throw ConfigError("parse error at line " + std::to_string(line) + ": " + e.what());
  }

  ErrorList errors;
  ExperimentConfig cfg;
  Level top(root, "config", errors);

  top.text("experiment", cfg.experiment);
  if (const json* node = top.object("scenario")) read_scenario(*node, cfg.scenario, errors);
  std::string mech = "devcg";
  top.text("mechanism", mech);
  if (mech == "devcg")
    cfg.mechanism = MechanismKind::devcg;
  else if (mech == "devcg-g")
    cfg.mechanism = MechanismKind::devcg_g;
  else
    errors.add("config.mechanism", "expected \"devcg\" or \"devcg-g\"");
  if (top.has("graph")) read_graph(root.at("graph"), cfg.graph, errors);
  top.integer("k_f", cfg.k_f);
  top.integer("k_s_window", cfg.k_s_window);
  if (const json* node = top.object("step")) {
    Level level(*node, "step", errors);
    level.number("a", cfg.step.a);
    level.number("b", cfg.step.b);
    level.finish();
  }
  top.number("p_bar", cfg.p_bar);
  top.unsigned_integer("seed", cfg.seed);
  bool has_sweep = false;
  if (const json* node = top.object("sweep")) {
    has_sweep = true;
    read_sweep(*node, cfg.sweep, errors);
  }
  top.text("out", cfg.out);
  top.finish();

  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), cfg.experiment) == names.end()) {
    std::string known;
    for (const std::string& n : names) known += (known.empty() ? "" : ", ") + n;
    errors.add("config.experiment", cfg.experiment.empty()
                                        ? "required; one of: " + known
                                        : "unknown experiment; one of: " + known);
  } else if (const char* want = expected_parameter(cfg.experiment)) {
    if (!has_sweep || cfg.sweep.values.empty())
      errors.add("config.sweep", std::string("experiment ") + cfg.experiment +
                                     " needs sweep values for parameter \"" + want + "\"");
    else if (cfg.sweep.parameter != want)
      errors.add("config.sweep.parameter",
                 std::string("experiment ") + cfg.experiment + " sweeps \"" + want + "\"");
  } else if (has_sweep) {
    errors.add("config.sweep", "experiment " + cfg.experiment + " takes no sweep");
  }

  if (cfg.experiment == "tisi-sweep" &&
      std::any_of(cfg.sweep.values.begin(), cfg.sweep.values.end(),
                  [](double v) { return v <= 0.0; }))
    errors.add("config.sweep.values", "declaration scales must be positive");
  if (cfg.experiment == "tisd-range-sweep") {
    if (cfg.scenario.type != "ev")
      errors.add("config.scenario.type", "tisd-range-sweep needs the ev scenario");
    if (std::any_of(cfg.sweep.values.begin(), cfg.sweep.values.end(),
                    [](double v) { return v < 0.0; }))
      errors.add("config.sweep.values", "misreport ranges must be non-negative");
  }
  if (cfg.experiment == "malice-sweep" &&
      std::any_of(cfg.sweep.values.begin(), cfg.sweep.values.end(),
                  [](double v) { return v > 0.0; }))
    errors.add("config.sweep.values", "declaration shifts must be non-positive");

  if (cfg.k_f < 1) errors.add("config.k_f", "must be at least 1");
  if (cfg.k_s_window < 1)
    errors.add("config.k_s_window", "must be at least 1");
  else if (cfg.k_f >= 1 && cfg.k_s_window >= cfg.k_f)
    errors.add("config.k_s_window", "must be smaller than k_f (the checkpoint precedes the end)");
  if (cfg.step.a <= 0.0) errors.add("config.step.a", "must be positive");
  if (cfg.step.b <= 0.0) errors.add("config.step.b", "must be positive");
  if (cfg.p_bar <= 0.0) errors.add("config.p_bar", "must be positive");
  if (cfg.out.empty()) errors.add("config.out", "must be non-empty");

  const int n = scenario_agents(cfg.scenario);
  if (cfg.sweep.agent < -1 || cfg.sweep.agent >= n)
    errors.add("config.sweep.agent", "agent index out of range");
  if (cfg.graph.kind == "edges") {
    try {
      build_graph(cfg.graph, n);
    } catch (const std::exception& e) {
      errors.add("config.graph.edges", e.what());
    }
  }

  errors.raise_if_any();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string echo_config(const ExperimentConfig& cfg) {
  ordered_json root;
  root["experiment"] = cfg.experiment;
  ordered_json scenario;
  scenario["type"] = cfg.scenario.type;
  if (cfg.scenario.type == "ev") {
    const EvParams& p = cfg.scenario.ev;
    scenario["agents"] = p.agents;
    scenario["slots"] = p.slots;
    scenario["delta_t"] = p.delta_t;
    scenario["beta"] = p.beta;
    scenario["base_price"] = p.base_price;
    scenario["degradation"] = p.degradation;
    scenario["battery_capacity"] = p.battery_capacity;
    scenario["max_soc"] = p.max_soc;
    scenario["alpha"] = p.alpha;
    scenario["gamma"] = p.gamma.empty() ? std::vector<double>(p.agents, 0.0) : p.gamma;
    scenario["initial_soc"] = p.initial_soc;
    scenario["demand"] = p.demand;
    scenario["x_max"] = p.x_max > 0.0 ? p.x_max : p.battery_capacity / 4.0;
  } else {
    const SyntheticParams& p = cfg.scenario.synthetic;
    scenario["a"] = p.a;
    scenario["m"] = p.m;
    scenario["lo"] = p.lo;
    scenario["hi"] = p.hi;
  }
  root["scenario"] = scenario;
  root["mechanism"] = mechanism_name(cfg.mechanism);
  if (cfg.graph.kind == "edges") {
    ordered_json edges = ordered_json::array();
    for (auto [i, j] : cfg.graph.edges) edges.push_back({i, j});
    root["graph"] = ordered_json{{"edges", edges}};
  } else {
    root["graph"] = cfg.graph.kind;
  }
  root["k_f"] = cfg.k_f;
  root["k_s_window"] = cfg.k_s_window;
  root["step"] = ordered_json{{"a", cfg.step.a}, {"b", cfg.step.b}};
  root["p_bar"] = cfg.p_bar;
  root["seed"] = cfg.seed;
  if (is_sweep_experiment(cfg.experiment)) {
    root["sweep"] = ordered_json{{"parameter", cfg.sweep.parameter},
                                 {"values", cfg.sweep.values},
                                 {"agent", cfg.sweep.agent}};
  }
  root["out"] = cfg.out;
  return root.dump(2) + "\n";
}

BuiltScenario build_scenario(const ScenarioConfig& scenario) {
  if (scenario.type == "ev") {
    EvInstance inst = build_ev_instance(scenario.ev);
    return {std::move(inst.costs), std::move(inst.X)};
  }
  SyntheticInstance inst = build_synthetic_instance(scenario.synthetic);
  return {std::move(inst.costs), std::move(inst.X)};
}

CommGraph build_graph(const GraphConfig& graph, int agents) {
  if (graph.kind == "complete") return CommGraph::complete(agents);
  if (graph.kind == "ring") return CommGraph::ring(agents);
  return CommGraph::from_edges(agents, graph.edges);
}

GameEnvironment build_environment(const ExperimentConfig& cfg) {
  BuiltScenario scenario = build_scenario(cfg.scenario);
  const int n = static_cast<int>(scenario.costs.size());
  return GameEnvironment{build_graph(cfg.graph, n),
                         std::move(scenario.X),
                         std::move(scenario.costs),
                         cfg.k_f,
                         cfg.k_s_window,
                         cfg.step,
                         cfg.p_bar,
                         cfg.seed,
                         false};
}

}  // namespace mechsim
