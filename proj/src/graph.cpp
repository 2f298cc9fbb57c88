#include "mechsim/graph.hpp"

#include <algorithm>
#include <stdexcept>

namespace mechsim {

CommGraph::CommGraph(int agents, std::vector<std::pair<int, int>> edges)
    : agents_(agents), edges_(std::move(edges)) {
  if (agents_ < 1) throw std::invalid_argument("graph needs at least one agent");
  adj_ = Matrix::Zero(agents_, agents_);
  for (auto& [u, v] : edges_) {
    if (u > v) std::swap(u, v);
    if (u < 0 || v >= agents_ || u == v) throw std::invalid_argument("bad edge");
    adj_(u, v) = adj_(v, u) = 1.0;
  }
  std::vector<int> all(agents_);
  for (int i = 0; i < agents_; ++i) all[i] = i;
  if (!connected(all)) throw std::invalid_argument("graph must be connected");
}

CommGraph CommGraph::complete(int agents) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < agents; ++i)
    for (int j = i + 1; j < agents; ++j) edges.emplace_back(i, j);
  return CommGraph(agents, std::move(edges));
}

CommGraph CommGraph::ring(int agents) {
  if (agents < 3) return complete(agents);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < agents; ++i) edges.emplace_back(i, (i + 1) % agents);
  return CommGraph(agents, std::move(edges));
}

CommGraph CommGraph::from_edges(int agents, const std::vector<std::pair<int, int>>& edges) {
  return CommGraph(agents, edges);
}

bool CommGraph::connected(const std::vector<int>& subset) const {
  if (subset.empty()) return false;
  std::vector<int> pos(agents_, -1);
  for (size_t k = 0; k < subset.size(); ++k) pos[subset[k]] = static_cast<int>(k);
  std::vector<char> seen(subset.size(), 0);
  std::vector<int> stack{subset[0]};
  seen[0] = 1;
  size_t reached = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : subset)
      if (!seen[pos[v]] && adjacent(u, v)) {
        seen[pos[v]] = 1;
        ++reached;
        stack.push_back(v);
      }
  }
  return reached == subset.size();
}

Matrix CommGraph::mixing_weights(const std::vector<int>& subset) const {
  const int m = static_cast<int>(subset.size());
  std::vector<int> deg(m, 0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      if (a != b && adjacent(subset[a], subset[b])) ++deg[a];
  Matrix W = Matrix::Zero(m, m);
  for (int a = 0; a < m; ++a) {
    double off = 0.0;
    for (int b = 0; b < m; ++b) {
      if (a == b || !adjacent(subset[a], subset[b])) continue;
      W(a, b) = 1.0 / (1.0 + std::max(deg[a], deg[b]));
      off += W(a, b);
    }
    W(a, a) = 1.0 - off;
  }
  return W;
}

}  // namespace mechsim
