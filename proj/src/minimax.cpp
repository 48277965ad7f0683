#include "arblink/minimax.hpp"

#include <algorithm>
#include <queue>

namespace arblink {

const char* to_string(Mode m) {
  return m == Mode::Directed ? "directed" : "undirected";
}

Mode mode_from_string(const std::string& s) {
  if (s == "directed") return Mode::Directed;
  if (s == "undirected") return Mode::Undirected;
  throw ConfigError("unknown mode '" + s + "' (directed|undirected)");
}

AdjacencyIndex::AdjacencyIndex(const WeightedDigraph& g)
    : g_(g), out_(g.nodes.size()), in_(g.nodes.size()) {
  for (uint32_t ei = 0; ei < g.edges.size(); ++ei) {
    out_[g.node_index(g.edges[ei].src)].push_back(ei);
    in_[g.node_index(g.edges[ei].dst)].push_back(ei);
  }
}

bool reachable(const WeightedDigraph& g, NodeRef u, NodeRef v, Mode mode) {
  size_t su = g.node_index(u);
  size_t sv = g.node_index(v);
  if (su == sv) return true;
  AdjacencyIndex adj(g);
  std::vector<char> seen(g.nodes.size(), 0);
  std::vector<size_t> stack{su};
  seen[su] = 1;
  while (!stack.empty()) {
    size_t x = stack.back();
    stack.pop_back();
    auto visit = [&](size_t y) {
      if (!seen[y]) {
        seen[y] = 1;
        stack.push_back(y);
      }
    };
    for (uint32_t ei : adj.out(x)) visit(g.node_index(g.edges[ei].dst));
    if (mode == Mode::Undirected)
      for (uint32_t ei : adj.in(x)) visit(g.node_index(g.edges[ei].src));
    if (seen[sv]) return true;
  }
  return false;
}

double minimax_dissimilarity(const WeightedDigraph& g, NodeRef u, NodeRef v,
                             Mode mode) {
  if (u == v)
    throw ContractError("minimax_dissimilarity requires distinct nodes");
  size_t su = g.node_index(u);
  size_t sv = g.node_index(v);
  AdjacencyIndex adj(g);

  // Best-first relaxation where a path's cost is its heaviest edge.
  std::vector<double> best(g.nodes.size(), kInf);
  using Item = std::pair<double, NodeRef>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> frontier;
  best[su] = -kInf;  // identity for max: no edges traversed yet
  frontier.push({best[su], u});
  std::vector<char> done(g.nodes.size(), 0);
  while (!frontier.empty()) {
    auto [d, node] = frontier.top();
    frontier.pop();
    size_t x = g.node_index(node);
    if (done[x]) continue;
    done[x] = 1;
    if (x == sv) return d;
    auto relax = [&](size_t y, double w) {
      double cand = std::max(d, w);
      if (cand < best[y]) {
        best[y] = cand;
        frontier.push({cand, g.nodes[y]});
      }
    };
    for (uint32_t ei : adj.out(x))
      relax(g.node_index(g.edges[ei].dst), g.edges[ei].weight);
    if (mode == Mode::Undirected)
      for (uint32_t ei : adj.in(x))
        relax(g.node_index(g.edges[ei].src), g.edges[ei].weight);
  }
  return kInf;
}

}  // namespace arblink
