#pragma once
// Serial reference implementations of the parallel kernels. Full-sort
// scans instead of bounded heaps, one thread, no slot preallocation.
// Tests compare these against the OpenMP paths; the benchmark times both.

#include "arblink/knn.hpp"
#include "arblink/types.hpp"

namespace arblink::ref {

std::vector<Neighbor> knn_mention_sources(const EmbeddingStore& store,
                                          uint32_t m, uint32_t k);

Neighbor nearest_entity(const EmbeddingStore& store, uint32_t m);

WeightedDigraph build_inference_graph(const EmbeddingStore& store, uint32_t k);

double recall_at_k(const EmbeddingStore& store,
                   const std::vector<std::optional<uint32_t>>& gold_entity,
                   uint32_t k);

}  // namespace arblink::ref
