#pragma once
// In-memory corpus: records with dense ids, the embedding store, and the
// sidecar maps back to original string ids.

#include <optional>
#include <string>
#include <vector>

#include "arblink/types.hpp"

namespace arblink {

struct Corpus {
  EmbeddingStore store;  // all mention rows + KB entity rows
  std::vector<MentionRecord> mentions;   // dense id = index
  std::vector<EntityRecord> entities;    // dense id = index
  std::vector<std::string> mention_names;
  std::vector<std::string> entity_names;
  std::vector<std::string> holdout_names;  // held-out gold labels

  uint32_t n_mentions() const { return uint32_t(mentions.size()); }
  uint32_t n_entities() const { return uint32_t(entities.size()); }

  // Per-mention KB gold entity (nullopt when unlabeled or held out).
  std::vector<std::optional<uint32_t>> gold_kb_entity() const;

  // Gold partition label per mention over the unified label space:
  // KB entities, then held-out clusters, then fresh singleton labels for
  // unlabeled mentions.
  std::vector<uint32_t> gold_partition_labels() const;

  void validate() const;
};

}  // namespace arblink
