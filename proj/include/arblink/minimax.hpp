#pragma once
// Minimax-path (bottleneck) dissimilarity and reachability over weighted
// digraphs, in directed and undirected ("disregard direction") modes.

#include "arblink/types.hpp"

namespace arblink {

enum class Mode { Directed, Undirected };

const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);  // ConfigError on junk

// Out-edge (and optionally in-edge) index over an immutable graph;
// shared by the search routines here.
class AdjacencyIndex {
 public:
  explicit AdjacencyIndex(const WeightedDigraph& g);
  size_t size() const { return out_.size(); }
  const std::vector<uint32_t>& out(size_t node) const { return out_[node]; }
  const std::vector<uint32_t>& in(size_t node) const { return in_[node]; }
  const WeightedDigraph& graph() const { return g_; }

 private:
  const WeightedDigraph& g_;
  std::vector<std::vector<uint32_t>> out_;  // edge indices
  std::vector<std::vector<uint32_t>> in_;
};

// True iff a path u -> v exists (directions ignored in Undirected mode).
// reachable(u, u) is true. LookupError on unknown nodes.
bool reachable(const WeightedDigraph& g, NodeRef u, NodeRef v, Mode mode);

// Weight of the minimax path from u to v: the minimum over paths of the
// maximum edge weight on the path, +inf when v is unreachable. Computed by
// best-first bottleneck relaxation; ties in the frontier resolve by NodeRef
// order. ContractError when u == v.
double minimax_dissimilarity(const WeightedDigraph& g, NodeRef u, NodeRef v,
                             Mode mode);

}  // namespace arblink
