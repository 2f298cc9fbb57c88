#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "mechsim/config.hpp"

namespace mechsim {

// Failure while executing an experiment (instance build, simulation, or
// output I/O). The config itself was already validated.
struct ExperimentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs the configured experiment and writes its artifacts under out_dir
// (created if missing): results.csv (long format, one row per cell and
// agent), settlement_NNN.json per cell in sweep order, repair logs for the
// filter demo, and manifest.json carrying the fully resolved config, every
// seed, and per-cell rerun configs for sweep experiments.
//
// `jobs` sizes the cell worker pool; outputs are byte-identical regardless.
// `log` receives one progress line per phase.
void run_experiment(const ExperimentConfig& config, const std::string& out_dir, int jobs,
                    std::ostream& log);

}  // namespace mechsim
