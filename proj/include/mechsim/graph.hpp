#pragma once

#include <utility>
#include <vector>

#include "mechsim/types.hpp"

namespace mechsim {

// Undirected communication graph over agents 0..n-1 with Metropolis mixing
// weights. The full graph must be connected; induced participant subgraphs are
// checked where they are used.
class CommGraph {
 public:
  static CommGraph complete(int agents);
  static CommGraph ring(int agents);
  static CommGraph from_edges(int agents, const std::vector<std::pair<int, int>>& edges);

  int agents() const { return agents_; }
  bool adjacent(int i, int j) const { return adj_(i, j) != 0.0; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  bool connected(const std::vector<int>& subset) const;

  // Metropolis weights on the induced subgraph: w_uv = 1/(1+max(deg_u,deg_v))
  // for edges, diagonal fills the slack. Rows/columns sum to 1; diagonal > 0.
  // Indexed by position in `subset` (ascending agent ids).
  Matrix mixing_weights(const std::vector<int>& subset) const;

 private:
  CommGraph(int agents, std::vector<std::pair<int, int>> edges);
  int agents_ = 0;
  std::vector<std::pair<int, int>> edges_;
  Matrix adj_;  // 0/1 adjacency
};

}  // namespace mechsim
