#include "arblink/knn.hpp"

#include <omp.h>

#include <algorithm>
#include <cassert>
#include <queue>

namespace arblink {

namespace {

using Key = std::pair<double, uint32_t>;  // (weight, id), ascending is better

constexpr uint32_t kQueryTile = 48;

// Bounded worst-at-top heap over a flat buffer; keeps the `cap` smallest
// keys seen, in candidate order.
struct TopK {
  Key* data = nullptr;
  uint32_t size = 0;
  uint32_t cap = 0;

  void offer(Key cand) {
    if (size < cap) {
      data[size++] = cand;
      std::push_heap(data, data + size);
    } else if (cap > 0 && cand < data[0]) {
      std::pop_heap(data, data + size);
      data[size - 1] = cand;
      std::push_heap(data, data + size);
    }
  }
  void sorted(std::vector<Neighbor>& out) const {
    std::vector<Key> keys(data, data + size);
    std::sort(keys.begin(), keys.end());
    out.resize(keys.size());
    for (size_t i = 0; i < keys.size(); ++i)
      out[i] = {keys[i].second, keys[i].first};
  }
};

}  // namespace

std::vector<std::vector<Neighbor>> batch_knn_mentions(
    const EmbeddingStore& store, uint32_t k) {
  uint32_t n = store.mention_count();
  if (k >= n)
    throw ConfigError("k=" + std::to_string(k) + " must be < |mentions|=" +
                      std::to_string(n));
  std::vector<std::vector<Neighbor>> out(n);
#pragma omp parallel
  {
    std::vector<Key> heap_storage(size_t(kQueryTile) * k);
    std::vector<TopK> heaps(kQueryTile);
#pragma omp for schedule(dynamic)
    for (int64_t tile = 0; tile < int64_t((n + kQueryTile - 1) / kQueryTile);
         ++tile) {
      uint32_t q0 = uint32_t(tile) * kQueryTile;
      uint32_t q1 = std::min(n, q0 + kQueryTile);
      for (uint32_t q = q0; q < q1; ++q)
        heaps[q - q0] = {heap_storage.data() + size_t(q - q0) * k, 0, k};
      for (uint32_t j = 0; j < n; ++j) {
        auto row = store.mention_row(j);
        for (uint32_t q = q0; q < q1; ++q) {
          if (j == q) continue;
          heaps[q - q0].offer({-dot_product(row, store.mention_row(q)), j});
        }
      }
      for (uint32_t q = q0; q < q1; ++q) heaps[q - q0].sorted(out[q]);
    }
  }
  return out;
}

std::vector<Neighbor> batch_nearest_entities(const EmbeddingStore& store) {
  uint32_t n = store.mention_count();
  uint32_t ne = store.entity_count();
  if (ne == 0) throw ConfigError("nearest_entity on an empty KB");
  std::vector<Neighbor> out(n);
#pragma omp parallel
  {
    std::vector<Key> best(kQueryTile);
#pragma omp for schedule(dynamic)
    for (int64_t tile = 0; tile < int64_t((n + kQueryTile - 1) / kQueryTile);
         ++tile) {
      uint32_t q0 = uint32_t(tile) * kQueryTile;
      uint32_t q1 = std::min(n, q0 + kQueryTile);
      for (uint32_t e = 0; e < ne; ++e) {
        auto row = store.entity_row(e);
        for (uint32_t q = q0; q < q1; ++q) {
          Key cand{-dot_product(row, store.mention_row(q)), e};
          if (e == 0 || cand < best[q - q0]) best[q - q0] = cand;
        }
      }
      for (uint32_t q = q0; q < q1; ++q)
        out[q] = {best[q - q0].second, best[q - q0].first};
    }
  }
  return out;
}

std::vector<Neighbor> ExactSearch::knn_mentions(uint32_t m, uint32_t k) const {
  uint32_t n = store_.mention_count();
  if (k >= n)
    throw ConfigError("k=" + std::to_string(k) + " must be < |mentions|=" +
                      std::to_string(n));
  auto query = store_.mention_row(m);
  std::priority_queue<Key> worst_first;  // max-heap keeps the k best keys
  for (uint32_t j = 0; j < n; ++j) {
    if (j == m) continue;
    Key cand{-dot_product(store_.mention_row(j), query), j};
    if (worst_first.size() < k) {
      worst_first.push(cand);
    } else if (k > 0 && cand < worst_first.top()) {
      worst_first.pop();
      worst_first.push(cand);
    }
  }
  std::vector<Neighbor> out(worst_first.size());
  for (size_t i = out.size(); i-- > 0;) {
    out[i] = {worst_first.top().second, worst_first.top().first};
    worst_first.pop();
  }
  return out;
}

Neighbor ExactSearch::nearest_entity(uint32_t m) const {
  uint32_t n = store_.entity_count();
  if (n == 0) throw ConfigError("nearest_entity on an empty KB");
  auto query = store_.mention_row(m);
  Key best{-dot_product(store_.entity_row(0), query), 0};
  for (uint32_t e = 1; e < n; ++e) {
    Key cand{-dot_product(store_.entity_row(e), query), e};
    best = std::min(best, cand);
  }
  return {best.second, best.first};
}

std::vector<uint32_t> knn_mention_sources(const EmbeddingStore& store,
                                          uint32_t m, uint32_t k) {
  ExactSearch search(store);
  std::vector<uint32_t> ids;
  for (const Neighbor& nb : search.knn_mentions(m, k)) ids.push_back(nb.id);
  return ids;
}

std::pair<uint32_t, double> nearest_entity(const EmbeddingStore& store,
                                           uint32_t m) {
  ExactSearch search(store);
  Neighbor nb = search.nearest_entity(m);
  return {nb.id, nb.weight};
}

WeightedDigraph build_inference_graph(const EmbeddingStore& store,
                                      const GraphBuildConfig& cfg) {
  uint32_t n_mentions = store.mention_count();
  uint32_t n_entities = store.entity_count();
  if (n_mentions == 0) throw ConfigError("graph build on empty mention set");
  if (n_entities == 0) throw ConfigError("graph build on empty KB");
  if (cfg.k < 1) throw ConfigError("k must be >= 1");

  uint32_t k = cfg.k;
  if (k >= n_mentions) {
    k = n_mentions - 1;
    warn("k=" + std::to_string(cfg.k) + " clamped to " + std::to_string(k) +
         " for a corpus of " + std::to_string(n_mentions) + " mentions");
  }

  std::vector<std::vector<Neighbor>> nn = batch_knn_mentions(store, k);
  std::vector<Neighbor> ent = batch_nearest_entities(store);

  WeightedDigraph g;
  g.nodes = dense_nodes(n_entities, n_mentions);
  g.edges.resize(size_t(n_mentions) * (k + 1));
  for (uint32_t m = 0; m < n_mentions; ++m) {
    Edge* slot = g.edges.data() + size_t(m) * (k + 1);
    slot[0] = {NodeRef::entity(ent[m].id), NodeRef::mention(m), ent[m].weight};
    assert(nn[m].size() == k);
    for (uint32_t i = 0; i < k; ++i) {
      assert(nn[m][i].id != m);
      slot[1 + i] = {NodeRef::mention(nn[m][i].id), NodeRef::mention(m),
                     nn[m][i].weight};
    }
  }
  return g;
}

WeightedDigraph build_inference_graph(const EmbeddingStore& store,
                                      const GraphBuildConfig& cfg,
                                      const NearestNeighborSearch& search) {
  uint32_t n_mentions = store.mention_count();
  uint32_t n_entities = store.entity_count();
  if (n_mentions == 0) throw ConfigError("graph build on empty mention set");
  if (n_entities == 0) throw ConfigError("graph build on empty KB");
  if (cfg.k < 1) throw ConfigError("k must be >= 1");

  uint32_t k = cfg.k;
  if (k >= n_mentions) {
    k = n_mentions - 1;
    warn("k=" + std::to_string(cfg.k) + " clamped to " + std::to_string(k) +
         " for a corpus of " + std::to_string(n_mentions) + " mentions");
  }

  WeightedDigraph g;
  g.nodes = dense_nodes(n_entities, n_mentions);
  g.edges.resize(size_t(n_mentions) * (k + 1));

  // Each query owns a fixed slot range, so the merge order never depends
  // on the worker count.
#pragma omp parallel for schedule(dynamic, 16)
  for (int64_t mi = 0; mi < int64_t(n_mentions); ++mi) {
    uint32_t m = uint32_t(mi);
    Edge* slot = g.edges.data() + size_t(m) * (k + 1);
    Neighbor ent = search.nearest_entity(m);
    slot[0] = {NodeRef::entity(ent.id), NodeRef::mention(m), ent.weight};
    std::vector<Neighbor> nn = search.knn_mentions(m, k);
    assert(nn.size() == k);
    for (uint32_t i = 0; i < k; ++i) {
      assert(nn[i].id != m);
      slot[1 + i] = {NodeRef::mention(nn[i].id), NodeRef::mention(m),
                     nn[i].weight};
    }
  }
  return g;
}

}  // namespace arblink
