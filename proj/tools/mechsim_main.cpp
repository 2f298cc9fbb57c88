#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

#include "mechsim/config.hpp"
#include "mechsim/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Simulation engine for decentralized settlement mechanisms"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  unsigned seed = 0;
  int jobs = 1;

  CLI::App* run = app.add_subcommand("run", "Run the configured experiment");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--out", out_override, "Output directory (overrides the config)");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "Seed override");
  run->add_option("--jobs", jobs, "Cell worker threads")->check(CLI::PositiveNumber);

  CLI::App* validate =
      app.add_subcommand("validate", "Check a config file and echo it fully resolved");
  validate->add_option("config", config_path, "Config file")->required();

  CLI::App* list = app.add_subcommand("list-experiments", "List the experiment names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const std::string& name : mechsim::experiment_names()) std::cout << name << "\n";
      return 0;
    }
    mechsim::ExperimentConfig cfg = mechsim::load_config(config_path);
    if (validate->parsed()) {
      std::cout << mechsim::echo_config(cfg);
      return 0;
    }
    if (seed_opt->count() > 0) cfg.seed = seed;
    std::string out = cfg.out;
    if (!out_override.empty()) out = out_override;
    if (const char* env = std::getenv("MECHSIM_OUT"); env != nullptr && *env != '\0') out = env;
    mechsim::run_experiment(cfg, out, jobs, std::cout);
    return 0;
  } catch (const mechsim::ConfigError& e) {
    std::cerr << "config error:\n" << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
