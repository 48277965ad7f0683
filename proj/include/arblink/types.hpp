#pragma once
// Core data model: mention/entity records, the embedding table, weighted
// digraphs over mention and entity nodes, clusterings and link decisions,
// plus the affinity/weight primitives everything else consumes.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arblink/error.hpp"

namespace arblink {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class NodeKind : uint8_t { Entity = 0, Mention = 1 };

// Entity nodes order before mention nodes, ties on id. Every deterministic
// tie-break in the library uses this order.
struct NodeRef {
  NodeKind kind = NodeKind::Mention;
  uint32_t id = 0;

  static NodeRef entity(uint32_t id) { return {NodeKind::Entity, id}; }
  static NodeRef mention(uint32_t id) { return {NodeKind::Mention, id}; }
  bool is_entity() const { return kind == NodeKind::Entity; }
  bool is_mention() const { return kind == NodeKind::Mention; }
  auto operator<=>(const NodeRef&) const = default;
};

std::string to_string(NodeRef n);  // "e:3" / "m:17"

// Gold label of a mention: a KB entity, or a held-out cluster for mentions
// whose entity was removed from the KB.
struct GoldRef {
  bool in_kb = true;
  uint32_t index = 0;  // entity id when in_kb, else held-out cluster index
  auto operator<=>(const GoldRef&) const = default;
};

struct MentionRecord {
  uint32_t mention_id = 0;  // dense, equals row index in the store
  std::string doc_id;
  std::optional<GoldRef> gold;
};

struct EntityRecord {
  uint32_t entity_id = 0;
  std::string name;
  std::string metadata;
};

// Dense vector table for all mentions and entities. Rows are stored as
// 32-bit floats; all affinity arithmetic happens in 64-bit.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(uint32_t dim, uint32_t n_mentions, uint32_t n_entities)
      : dim_(dim),
        mentions_(size_t(n_mentions) * dim, 0.0f),
        entities_(size_t(n_entities) * dim, 0.0f) {}

  uint32_t dim() const { return dim_; }
  uint32_t mention_count() const {
    return dim_ == 0 ? 0 : uint32_t(mentions_.size() / dim_);
  }
  uint32_t entity_count() const {
    return dim_ == 0 ? 0 : uint32_t(entities_.size() / dim_);
  }

  std::span<float> mention_row(uint32_t i);
  std::span<const float> mention_row(uint32_t i) const;
  std::span<float> entity_row(uint32_t e);
  std::span<const float> entity_row(uint32_t e) const;

  // Rejects NaN/Inf values; reports the offending row.
  void check_finite() const;
  // Optional unit normalization; off by default everywhere.
  void l2_normalize_rows();

  bool operator==(const EmbeddingStore&) const = default;

 private:
  uint32_t dim_ = 0;
  std::vector<float> mentions_;
  std::vector<float> entities_;
};

// Inner product with 64-bit accumulation over a fixed 8-lane index pattern.
// The pattern is a pure function of the index and symmetric in (a, b), so
// equal inputs give bit-equal results on every code path and thread count.
inline double dot_product(std::span<const float> a, std::span<const float> b) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
  size_t n = a.size();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 += double(a[i + 0]) * double(b[i + 0]);
    s1 += double(a[i + 1]) * double(b[i + 1]);
    s2 += double(a[i + 2]) * double(b[i + 2]);
    s3 += double(a[i + 3]) * double(b[i + 3]);
    s4 += double(a[i + 4]) * double(b[i + 4]);
    s5 += double(a[i + 5]) * double(b[i + 5]);
    s6 += double(a[i + 6]) * double(b[i + 6]);
    s7 += double(a[i + 7]) * double(b[i + 7]);
  }
  if (i + 0 < n) s0 += double(a[i + 0]) * double(b[i + 0]);
  if (i + 1 < n) s1 += double(a[i + 1]) * double(b[i + 1]);
  if (i + 2 < n) s2 += double(a[i + 2]) * double(b[i + 2]);
  if (i + 3 < n) s3 += double(a[i + 3]) * double(b[i + 3]);
  if (i + 4 < n) s4 += double(a[i + 4]) * double(b[i + 4]);
  if (i + 5 < n) s5 += double(a[i + 5]) * double(b[i + 5]);
  if (i + 6 < n) s6 += double(a[i + 6]) * double(b[i + 6]);
  return ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7));
}

// Mention-mention affinity (inner product of mention rows). Symmetric.
double affinity_mm(const EmbeddingStore& s, uint32_t i, uint32_t j);
// Entity-mention affinity.
double affinity_me(const EmbeddingStore& s, uint32_t e, uint32_t i);
// Edge weight from an affinity: the negation. Applies to both edge kinds.
double edge_weight(double affinity);

struct Edge {
  NodeRef src;
  NodeRef dst;
  double weight = 0.0;
  auto operator<=>(const Edge&) const = default;
};

// Directed weighted graph over an explicit node set. Nodes are kept
// sorted; edges in builder order.
struct WeightedDigraph {
  std::vector<NodeRef> nodes;  // sorted ascending, unique
  std::vector<Edge> edges;

  bool contains(NodeRef n) const;
  size_t node_index(NodeRef n) const;  // LookupError when absent
  // No self-loops, no duplicate (src, dst), finite weights, endpoints
  // inside the node set.
  void validate() const;
};

// Convenience: node set {e:0..n_entities-1} u {m:0..n_mentions-1}.
std::vector<NodeRef> dense_nodes(uint32_t n_entities, uint32_t n_mentions);

// Disjoint partition of a graph's nodes; at most one entity per cluster.
struct Clustering {
  std::vector<std::vector<NodeRef>> clusters;  // members sorted; clusters
                                               // sorted by first member
};

// Per-mention assignment to a KB entity or NIL (nullopt).
struct LinkResult {
  std::vector<std::pair<uint32_t, std::optional<uint32_t>>> assignments;
  std::optional<uint32_t> at(uint32_t mention_id) const;  // LookupError if absent
};

}  // namespace arblink
