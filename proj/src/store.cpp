#include "arblink/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

namespace arblink {

void warn(const std::string& msg) {
  std::fprintf(stderr, "warning: %s\n", msg.c_str());
}

std::string to_string(NodeRef n) {
  return (n.is_entity() ? "e:" : "m:") + std::to_string(n.id);
}

std::span<float> EmbeddingStore::mention_row(uint32_t i) {
  if (i >= mention_count())
    throw LookupError("mention id " + std::to_string(i) + " out of range");
  return {mentions_.data() + size_t(i) * dim_, dim_};
}

std::span<const float> EmbeddingStore::mention_row(uint32_t i) const {
  if (i >= mention_count())
    throw LookupError("mention id " + std::to_string(i) + " out of range");
  return {mentions_.data() + size_t(i) * dim_, dim_};
}

std::span<float> EmbeddingStore::entity_row(uint32_t e) {
  if (e >= entity_count())
    throw LookupError("entity id " + std::to_string(e) + " out of range");
  return {entities_.data() + size_t(e) * dim_, dim_};
}

std::span<const float> EmbeddingStore::entity_row(uint32_t e) const {
  if (e >= entity_count())
    throw LookupError("entity id " + std::to_string(e) + " out of range");
  return {entities_.data() + size_t(e) * dim_, dim_};
}

void EmbeddingStore::check_finite() const {
  auto scan = [&](const std::vector<float>& data, const char* kind) {
    for (size_t i = 0; i < data.size(); ++i) {
      if (!std::isfinite(data[i]))
        throw DataError(std::string("non-finite value in ") + kind + " row " +
                        std::to_string(i / dim_));
    }
  };
  scan(mentions_, "mention");
  scan(entities_, "entity");
}

void EmbeddingStore::l2_normalize_rows() {
  auto norm_rows = [&](std::vector<float>& data) {
    for (size_t r = 0; r * dim_ < data.size(); ++r) {
      std::span<const float> row(data.data() + r * dim_, dim_);
      double n = std::sqrt(dot_product(row, row));
      if (n > 0.0) {
        for (uint32_t d = 0; d < dim_; ++d)
          data[r * dim_ + d] = float(double(data[r * dim_ + d]) / n);
      }
    }
  };
  norm_rows(mentions_);
  norm_rows(entities_);
}

double affinity_mm(const EmbeddingStore& s, uint32_t i, uint32_t j) {
  if (i == j)
    throw ContractError("affinity_mm requires distinct mentions, got " +
                        std::to_string(i) + " twice");
  return dot_product(s.mention_row(i), s.mention_row(j));
}

double affinity_me(const EmbeddingStore& s, uint32_t e, uint32_t i) {
  return dot_product(s.entity_row(e), s.mention_row(i));
}

double edge_weight(double affinity) {
  if (!std::isfinite(affinity))
    throw ContractError("edge_weight on non-finite affinity");
  return -affinity;
}

bool WeightedDigraph::contains(NodeRef n) const {
  return std::binary_search(nodes.begin(), nodes.end(), n);
}

size_t WeightedDigraph::node_index(NodeRef n) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), n);
  if (it == nodes.end() || *it != n)
    throw LookupError("node " + to_string(n) + " not in graph");
  return size_t(it - nodes.begin());
}

void WeightedDigraph::validate() const {
  for (size_t i = 1; i < nodes.size(); ++i)
    if (!(nodes[i - 1] < nodes[i]))
      throw ContractError("graph node set not sorted/unique");
  std::unordered_set<uint64_t> seen;
  seen.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.src == e.dst) throw ContractError("self-loop on " + to_string(e.src));
    if (!std::isfinite(e.weight))
      throw ContractError("non-finite weight on edge " + to_string(e.src) +
                          " -> " + to_string(e.dst));
    if (!contains(e.src) || !contains(e.dst))
      throw ContractError("edge endpoint outside node set: " +
                          to_string(e.src) + " -> " + to_string(e.dst));
    uint64_t key = (uint64_t(node_index(e.src)) << 32) |
                   uint64_t(node_index(e.dst));
    if (!seen.insert(key).second)
      throw ContractError("duplicate edge " + to_string(e.src) + " -> " +
                          to_string(e.dst));
  }
}

std::vector<NodeRef> dense_nodes(uint32_t n_entities, uint32_t n_mentions) {
  std::vector<NodeRef> nodes;
  nodes.reserve(size_t(n_entities) + n_mentions);
  for (uint32_t e = 0; e < n_entities; ++e) nodes.push_back(NodeRef::entity(e));
  for (uint32_t m = 0; m < n_mentions; ++m) nodes.push_back(NodeRef::mention(m));
  return nodes;
}

std::optional<uint32_t> LinkResult::at(uint32_t mention_id) const {
  for (const auto& [m, e] : assignments)
    if (m == mention_id) return e;
  throw LookupError("no assignment for mention " + std::to_string(mention_id));
}

}  // namespace arblink
