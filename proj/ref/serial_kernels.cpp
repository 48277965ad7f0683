#include "serial_kernels.hpp"

#include <algorithm>

namespace arblink::ref {

std::vector<Neighbor> knn_mention_sources(const EmbeddingStore& store,
                                          uint32_t m, uint32_t k) {
  uint32_t n = store.mention_count();
  if (k >= n)
    throw ConfigError("k=" + std::to_string(k) + " must be < |mentions|");
  auto query = store.mention_row(m);
  std::vector<std::pair<double, uint32_t>> keyed;
  keyed.reserve(n - 1);
  for (uint32_t j = 0; j < n; ++j) {
    if (j == m) continue;
    keyed.push_back({-dot_product(store.mention_row(j), query), j});
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<Neighbor> out;
  for (uint32_t i = 0; i < k; ++i) out.push_back({keyed[i].second, keyed[i].first});
  return out;
}

Neighbor nearest_entity(const EmbeddingStore& store, uint32_t m) {
  uint32_t n = store.entity_count();
  if (n == 0) throw ConfigError("nearest_entity on an empty KB");
  auto query = store.mention_row(m);
  std::vector<std::pair<double, uint32_t>> keyed;
  keyed.reserve(n);
  for (uint32_t e = 0; e < n; ++e)
    keyed.push_back({-dot_product(store.entity_row(e), query), e});
  auto best = *std::min_element(keyed.begin(), keyed.end());
  return {best.second, best.first};
}

WeightedDigraph build_inference_graph(const EmbeddingStore& store, uint32_t k) {
  uint32_t n_mentions = store.mention_count();
  if (k >= n_mentions) k = n_mentions - 1;
  WeightedDigraph g;
  g.nodes = dense_nodes(store.entity_count(), n_mentions);
  for (uint32_t m = 0; m < n_mentions; ++m) {
    Neighbor ent = ref::nearest_entity(store, m);
    g.edges.push_back({NodeRef::entity(ent.id), NodeRef::mention(m), ent.weight});
    for (const Neighbor& nb : ref::knn_mention_sources(store, m, k))
      g.edges.push_back({NodeRef::mention(nb.id), NodeRef::mention(m), nb.weight});
  }
  return g;
}

double recall_at_k(const EmbeddingStore& store,
                   const std::vector<std::optional<uint32_t>>& gold_entity,
                   uint32_t k) {
  uint32_t n_entities = store.entity_count();
  k = std::min(k, n_entities);
  uint64_t scored = 0, hits = 0;
  for (uint32_t m = 0; m < gold_entity.size(); ++m) {
    if (!gold_entity[m]) continue;
    ++scored;
    auto query = store.mention_row(m);
    std::vector<std::pair<double, uint32_t>> keyed;
    for (uint32_t e = 0; e < n_entities; ++e)
      keyed.push_back({-dot_product(store.entity_row(e), query), e});
    std::sort(keyed.begin(), keyed.end());
    for (uint32_t i = 0; i < k; ++i)
      if (keyed[i].second == *gold_entity[m]) {
        ++hits;
        break;
      }
  }
  if (scored == 0) throw DataError("recall_at_k: no gold-in-KB mentions");
  return double(hits) / double(scored);
}

}  // namespace arblink::ref
