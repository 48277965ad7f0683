#pragma once
// Cross-document inference graph: for every mention, incoming edges from
// its k nearest mentions and from its single nearest entity. Edge weights
// are negated inner products.

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "arblink/types.hpp"

namespace arblink {

struct GraphBuildConfig {
  uint32_t k = 1;  // mention neighbors per mention
};

struct Neighbor {
  uint32_t id = 0;
  double weight = 0.0;  // w = -affinity
};

// Search contract shared by the exact scanner and any approximate drop-in:
// results ordered by ascending (weight, id); queries are read-only and may
// run concurrently.
class NearestNeighborSearch {
 public:
  virtual ~NearestNeighborSearch() = default;
  // k nearest mention sources for mention m, excluding m itself.
  virtual std::vector<Neighbor> knn_mentions(uint32_t m, uint32_t k) const = 0;
  // Nearest entity for mention m.
  virtual Neighbor nearest_entity(uint32_t m) const = 0;
};

// Brute-force scan with a bounded heap per query. Exact and deterministic.
class ExactSearch : public NearestNeighborSearch {
 public:
  explicit ExactSearch(const EmbeddingStore& store) : store_(store) {}
  std::vector<Neighbor> knn_mentions(uint32_t m, uint32_t k) const override;
  Neighbor nearest_entity(uint32_t m) const override;

 private:
  const EmbeddingStore& store_;
};

// Batch queries with cache tiling: candidate rows stream once per query
// tile instead of once per query. Bit-identical to the per-query scans.
std::vector<std::vector<Neighbor>> batch_knn_mentions(
    const EmbeddingStore& store, uint32_t k);
std::vector<Neighbor> batch_nearest_entities(const EmbeddingStore& store);

// The k mentions (excluding m) with lowest weight to m; ascending weight,
// ties by ascending mention id. ConfigError when k >= |mentions|.
std::vector<uint32_t> knn_mention_sources(const EmbeddingStore& store,
                                          uint32_t m, uint32_t k);

// Entity with minimal weight to m, ties by ascending entity id.
// ConfigError on an empty KB.
std::pair<uint32_t, double> nearest_entity(const EmbeddingStore& store,
                                           uint32_t m);

// Full inference graph: per mention, k mention in-edges plus one entity
// in-edge; |E| = |mentions| * (k+1). k is clamped to |mentions|-1 with a
// warning when the corpus is too small. Parallel over queries; the edge
// list is identical for any thread count.
WeightedDigraph build_inference_graph(const EmbeddingStore& store,
                                      const GraphBuildConfig& cfg);
WeightedDigraph build_inference_graph(const EmbeddingStore& store,
                                      const GraphBuildConfig& cfg,
                                      const NearestNeighborSearch& search);

}  // namespace arblink
