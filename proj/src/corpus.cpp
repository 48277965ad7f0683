#include "arblink/corpus.hpp"

#include <unordered_set>

namespace arblink {

std::vector<std::optional<uint32_t>> Corpus::gold_kb_entity() const {
  std::vector<std::optional<uint32_t>> out(mentions.size());
  for (size_t i = 0; i < mentions.size(); ++i)
    if (mentions[i].gold && mentions[i].gold->in_kb)
      out[i] = mentions[i].gold->index;
  return out;
}

std::vector<uint32_t> Corpus::gold_partition_labels() const {
  std::vector<uint32_t> labels(mentions.size());
  uint32_t fresh = n_entities() + uint32_t(holdout_names.size());
  for (size_t i = 0; i < mentions.size(); ++i) {
    if (!mentions[i].gold) {
      labels[i] = fresh++;
    } else if (mentions[i].gold->in_kb) {
      labels[i] = mentions[i].gold->index;
    } else {
      labels[i] = n_entities() + mentions[i].gold->index;
    }
  }
  return labels;
}

void Corpus::validate() const {
  if (store.mention_count() != n_mentions() ||
      store.entity_count() != n_entities())
    throw DataError("store row counts do not match record counts");
  store.check_finite();
  for (size_t i = 0; i < mentions.size(); ++i) {
    if (mentions[i].mention_id != i)
      throw DataError("mention record ids not dense");
    if (mentions[i].gold) {
      const GoldRef& g = *mentions[i].gold;
      uint32_t limit = g.in_kb ? n_entities() : uint32_t(holdout_names.size());
      if (g.index >= limit)
        throw DataError("gold label out of range for mention " +
                        std::to_string(i));
    }
  }
  for (size_t e = 0; e < entities.size(); ++e)
    if (entities[e].entity_id != e)
      throw DataError("entity record ids not dense");
}

}  // namespace arblink
