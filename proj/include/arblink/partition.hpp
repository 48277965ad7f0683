#pragma once
// Constrained partitioning of the inference graph into entity-rooted
// clusters: threshold pruning, then heaviest-first edge examination with
// entity-count and entity-reachability checks.

#include <string>
#include <vector>

#include "arblink/minimax.hpp"
#include "arblink/types.hpp"

namespace arblink {

struct PartitionConfig {
  double lambda = kInf;  // dissimilarity threshold; +inf keeps everything
  Mode mode = Mode::Directed;
};

enum class EdgeAction { ThresholdDrop, ViolationDrop, RedundantDrop, Kept };

const char* to_string(EdgeAction a);

struct TraceEntry {
  Edge edge;
  EdgeAction action;
  std::string reason;
};

// Audit log of the procedure: every input edge appears exactly once, in
// examination order.
struct PartitionTrace {
  std::vector<TraceEntry> entries;
  std::string to_text() const;  // line-oriented export
};

struct PartitionResult {
  WeightedDigraph pruned;
  Clustering clusters;
  PartitionTrace trace;
};

// Partition G per the constrained procedure. Guarantees: at most one
// entity per cluster, every retained edge weight <= lambda, and in
// Directed mode every mention of an entity-bearing cluster is reachable
// from its entity. Deterministic: edges are visited in descending weight,
// ties by ascending (src, dst) NodeRef order. ContractError when an
// entity has an incoming edge.
PartitionResult partition_graph(const WeightedDigraph& g,
                                const PartitionConfig& cfg);

// Mention -> the cluster's entity, NIL (nullopt) when the cluster has
// none. ContractError on a cluster with two entities.
LinkResult link_decisions(const Clustering& clusters);

// The clusters with no entity node, in deterministic order.
std::vector<std::vector<NodeRef>> discovered_clusters(
    const Clustering& clusters);

}  // namespace arblink
