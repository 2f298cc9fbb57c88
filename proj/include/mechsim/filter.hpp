#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "mechsim/distopt.hpp"
#include "mechsim/types.hpp"

namespace mechsim {

// One agent's cross-sequence data, flattened into a causal stream: for each
// step k in [k_s, k_f], the social pair first, then the leave-one-out
// sequences in ascending order of the excluded agent.
struct InterleavedStream {
  int agent = -1;
  std::vector<Vector> states;        // eta^t
  std::vector<Vector> gradients;     // xi^t
  std::vector<int> origin;           // excluded-agent tag per entry (-1 = social)
  int size() const { return static_cast<int>(states.size()); }
};

// Output of the causal repair pass.
struct FilterState {
  std::vector<Vector> repaired;        // xi-tilde, same length as the stream
  std::vector<double> step_repair;     // ||xi-tilde - xi||^2 per entry
  std::vector<char> passed_through;    // entry satisfied all constraints raw
  double repair_magnitude = 0.0;       // sum of step_repair
};

struct ConsistencyVerdict {
  bool consistent = true;
  std::optional<int> first_violation;  // stream index of the first repair
  double repair_magnitude = 0.0;
};

InterleavedStream interleave(const std::vector<SequenceTrace>& traces, int agent, int k_s,
                             int k_f);

// Causal minimal repair: each incoming gradient is projected onto the
// constraints that keep the stream consistent with subgradients of a single
// convex function, tracked via max-path values between visited states.
// Gradients already satisfying every constraint pass through bit-identically.
FilterState filter_stream(const InterleavedStream& stream);

ConsistencyVerdict check_consistency(const InterleavedStream& stream);

// Repair log: agent,t,sequence,repair,pass_through.
void write_repair_log(std::ostream& out, const InterleavedStream& stream, const FilterState& fs);

}  // namespace mechsim
