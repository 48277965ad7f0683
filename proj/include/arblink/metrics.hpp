#pragma once
// Evaluation: linking accuracy with seen/unseen splits, recall@k over
// entity candidates, NMI/ARI partition agreement, and the entity-holdout
// protocol for discovery runs.

#include <cstdint>
#include <optional>
#include <vector>

#include "arblink/corpus.hpp"
#include "arblink/types.hpp"

namespace arblink {

struct EvalReport {
  double overall_acc = 0.0;
  double seen_acc = 0.0;
  double unseen_acc = 0.0;
  double kb_acc = 0.0;   // restricted to mentions whose gold is a KB entity
  double nil_acc = 0.0;  // restricted to held-out-gold mentions
  uint64_t n_scored = 0, n_seen = 0, n_unseen = 0, n_kb = 0, n_nil = 0;
  double recall = 0.0;
  uint32_t recall_k = 0;
  double nmi = 0.0;
  double ari = 0.0;
};

struct LinkingAccuracy {
  double overall = 0.0, seen = 0.0, unseen = 0.0, kb = 0.0, nil = 0.0;
  uint64_t n_scored = 0, n_seen = 0, n_unseen = 0, n_kb = 0, n_nil = 0;
};

// Per-mention prediction slot; `entity` nullopt means NIL.
struct PredEntry {
  bool predicted = false;
  std::optional<uint32_t> entity;
};

// Accuracy of predictions against gold. Gold-KB mentions are correct on
// an exact entity match (NIL counts as wrong); held-out-gold mentions are
// correct exactly on a NIL prediction. The seen/unseen split follows the
// gold entity's membership in `seen_entities` (held-out golds are unseen).
// Unlabeled mentions are ignored. Empty buckets score 1.0 with count 0.
// DataError when a gold-labeled mention has no prediction.
LinkingAccuracy linking_accuracy(const std::vector<PredEntry>& pred,
                                 const std::vector<std::optional<GoldRef>>& gold,
                                 const std::vector<bool>& seen_entities);

// Fraction of gold-in-KB mentions whose gold entity ranks among the k
// highest-affinity entities. k above |entities| clamps with a warning.
double recall_at_k(const EmbeddingStore& store,
                   const std::vector<std::optional<uint32_t>>& gold_entity,
                   uint32_t k);

// Normalized mutual information between two labelings of the same
// universe, normalized by the arithmetic mean of entropies. When either
// entropy is zero: 1.0 if the partitions are identical, else 0.0.
double nmi(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);

// Adjusted Rand index (permutation model).
double ari(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);

struct HoldoutResult {
  Corpus corpus;                         // held-out entity rows removed
  std::vector<uint32_t> removed;         // original entity ids, ascending
  std::vector<uint32_t> gold_partition;  // per mention, over the new label space
};

// Removes a seeded random fraction of KB entities; their mentions' gold
// labels become held-out cluster labels. ConfigError when the fraction
// would empty the KB.
HoldoutResult discovery_holdout(const Corpus& corpus, double fraction,
                                uint64_t seed);

}  // namespace arblink
