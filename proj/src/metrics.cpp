#include "arblink/metrics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "arblink/rng.hpp"

namespace arblink {

LinkingAccuracy linking_accuracy(const std::vector<PredEntry>& pred,
                                 const std::vector<std::optional<GoldRef>>& gold,
                                 const std::vector<bool>& seen_entities) {
  if (pred.size() != gold.size())
    throw DataError("prediction/gold size mismatch");
  uint64_t hit = 0, hit_seen = 0, hit_unseen = 0, hit_kb = 0, hit_nil = 0;
  LinkingAccuracy acc;
  for (size_t m = 0; m < gold.size(); ++m) {
    if (!gold[m]) continue;
    if (!pred[m].predicted)
      throw DataError("missing prediction for gold-labeled mention " +
                      std::to_string(m));
    const GoldRef& g = *gold[m];
    bool correct = g.in_kb ? (pred[m].entity && *pred[m].entity == g.index)
                           : !pred[m].entity;
    bool seen = g.in_kb && g.index < seen_entities.size() &&
                seen_entities[g.index];
    ++acc.n_scored;
    hit += correct;
    if (seen) {
      ++acc.n_seen;
      hit_seen += correct;
    } else {
      ++acc.n_unseen;
      hit_unseen += correct;
    }
    if (g.in_kb) {
      ++acc.n_kb;
      hit_kb += correct;
    } else {
      ++acc.n_nil;
      hit_nil += correct;
    }
  }
  auto frac = [](uint64_t h, uint64_t n) {
    return n == 0 ? 1.0 : double(h) / double(n);
  };
  acc.overall = frac(hit, acc.n_scored);
  acc.seen = frac(hit_seen, acc.n_seen);
  acc.unseen = frac(hit_unseen, acc.n_unseen);
  acc.kb = frac(hit_kb, acc.n_kb);
  acc.nil = frac(hit_nil, acc.n_nil);
  return acc;
}

double recall_at_k(const EmbeddingStore& store,
                   const std::vector<std::optional<uint32_t>>& gold_entity,
                   uint32_t k) {
  uint32_t n_entities = store.entity_count();
  if (n_entities == 0) throw ConfigError("recall_at_k on an empty KB");
  if (k == 0) throw ConfigError("recall_at_k needs k >= 1");
  if (k > n_entities) {
    warn("recall k=" + std::to_string(k) + " clamped to |entities|=" +
         std::to_string(n_entities));
    k = n_entities;
  }
  std::vector<char> hits(gold_entity.size(), 0);
  std::vector<char> scored(gold_entity.size(), 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (int64_t m = 0; m < int64_t(gold_entity.size()); ++m) {
    if (!gold_entity[size_t(m)]) continue;
    scored[size_t(m)] = 1;
    uint32_t gold = *gold_entity[size_t(m)];
    auto query = store.mention_row(uint32_t(m));
    double gold_aff = dot_product(store.entity_row(gold), query);
    // Rank of gold under (affinity desc, id asc); no sort needed.
    uint32_t ahead = 0;
    for (uint32_t e = 0; e < n_entities && ahead < k; ++e) {
      if (e == gold) continue;
      double a = dot_product(store.entity_row(e), query);
      if (a > gold_aff || (a == gold_aff && e < gold)) ++ahead;
    }
    hits[size_t(m)] = ahead < k;
  }
  uint64_t n = 0, h = 0;
  for (size_t m = 0; m < hits.size(); ++m) {
    n += scored[m];
    h += hits[m];
  }
  if (n == 0) throw DataError("recall_at_k: no gold-in-KB mentions");
  return double(h) / double(n);
}

namespace {

struct Contingency {
  std::vector<uint64_t> sizes_a, sizes_b;
  std::map<std::pair<uint32_t, uint32_t>, uint64_t> joint;
  uint64_t n = 0;

  Contingency(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    if (a.size() != b.size())
      throw DataError("partitions cover different universes");
    n = a.size();
    auto densify = [](const std::vector<uint32_t>& v,
                      std::vector<uint32_t>& out) {
      std::map<uint32_t, uint32_t> remap;
      out.reserve(v.size());
      for (uint32_t x : v)
        out.push_back(remap.try_emplace(x, uint32_t(remap.size())).first->second);
      return remap.size();
    };
    std::vector<uint32_t> da, db;
    sizes_a.assign(densify(a, da), 0);
    sizes_b.assign(densify(b, db), 0);
    for (size_t i = 0; i < a.size(); ++i) {
      ++sizes_a[da[i]];
      ++sizes_b[db[i]];
      ++joint[{da[i], db[i]}];
    }
  }

  bool identical() const {
    return joint.size() == sizes_a.size() && joint.size() == sizes_b.size();
  }
};

double entropy(const std::vector<uint64_t>& sizes, uint64_t n) {
  double h = 0.0;
  for (uint64_t s : sizes) {
    if (s == 0) continue;
    double p = double(s) / double(n);
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

double nmi(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  Contingency c(a, b);
  if (c.n == 0) throw DataError("nmi over an empty universe");
  if (c.identical()) return 1.0;
  double ha = entropy(c.sizes_a, c.n);
  double hb = entropy(c.sizes_b, c.n);
  if (ha == 0.0 || hb == 0.0) return 0.0;
  // Summing the cell terms in sorted value order makes the result exactly
  // symmetric in (a, b).
  std::vector<double> terms;
  terms.reserve(c.joint.size());
  for (const auto& [cell, count] : c.joint) {
    double pij = double(count) / double(c.n);
    double pi = double(c.sizes_a[cell.first]) / double(c.n);
    double pj = double(c.sizes_b[cell.second]) / double(c.n);
    terms.push_back(pij * std::log(pij / (pi * pj)));
  }
  std::sort(terms.begin(), terms.end());
  double mi = 0.0;
  for (double t : terms) mi += t;
  return mi / (0.5 * (ha + hb));
}

double ari(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  Contingency c(a, b);
  if (c.n < 2) throw DataError("ari needs at least 2 elements");
  auto comb2 = [](uint64_t x) -> int64_t {
    return int64_t(x) * (int64_t(x) - 1) / 2;
  };
  int64_t idx = 0, sum_a = 0, sum_b = 0;
  for (const auto& kv : c.joint) idx += comb2(kv.second);
  for (uint64_t s : c.sizes_a) sum_a += comb2(s);
  for (uint64_t s : c.sizes_b) sum_b += comb2(s);
  double total = double(comb2(c.n));
  double expected = double(sum_a) * double(sum_b) / total;
  double max_idx = 0.5 * (double(sum_a) + double(sum_b));
  double denom = max_idx - expected;
  if (denom == 0.0) return c.identical() ? 1.0 : 0.0;
  return (double(idx) - expected) / denom;
}

HoldoutResult discovery_holdout(const Corpus& corpus, double fraction,
                                uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ConfigError("holdout fraction must be in (0, 1)");
  uint32_t n = corpus.n_entities();
  uint32_t n_remove = uint32_t(std::llround(fraction * double(n)));
  if (n_remove >= n)
    throw ConfigError("holdout would remove every KB entity");

  // Seeded sample: order entities by a keyed hash, take the first chunk.
  std::vector<uint32_t> order(n);
  for (uint32_t e = 0; e < n; ++e) order[e] = e;
  std::sort(order.begin(), order.end(), [&](uint32_t x, uint32_t y) {
    uint64_t kx = rng::key(seed, 0x401dull, x);
    uint64_t ky = rng::key(seed, 0x401dull, y);
    return kx != ky ? kx < ky : x < y;
  });

  HoldoutResult res;
  res.removed.assign(order.begin(), order.begin() + n_remove);
  std::sort(res.removed.begin(), res.removed.end());

  std::vector<char> removed(n, 0);
  for (uint32_t e : res.removed) removed[e] = 1;

  Corpus& out = res.corpus;
  uint32_t kept = n - n_remove;
  out.store = EmbeddingStore(corpus.store.dim(), corpus.n_mentions(), kept);
  for (uint32_t m = 0; m < corpus.n_mentions(); ++m) {
    auto src = corpus.store.mention_row(m);
    std::copy(src.begin(), src.end(), out.store.mention_row(m).begin());
  }
  out.mention_names = corpus.mention_names;
  out.holdout_names = corpus.holdout_names;

  std::vector<std::optional<uint32_t>> entity_remap(n);
  std::vector<uint32_t> holdout_remap(n, 0);
  uint32_t next = 0;
  for (uint32_t e = 0; e < n; ++e) {
    if (removed[e]) {
      holdout_remap[e] = uint32_t(out.holdout_names.size());
      out.holdout_names.push_back(corpus.entity_names[e]);
      continue;
    }
    entity_remap[e] = next;
    auto src = corpus.store.entity_row(e);
    std::copy(src.begin(), src.end(), out.store.entity_row(next).begin());
    EntityRecord rec = corpus.entities[e];
    rec.entity_id = next;
    out.entities.push_back(std::move(rec));
    out.entity_names.push_back(corpus.entity_names[e]);
    ++next;
  }

  out.mentions = corpus.mentions;
  for (MentionRecord& rec : out.mentions) {
    if (!rec.gold) continue;
    if (rec.gold->in_kb) {
      uint32_t e = rec.gold->index;
      rec.gold = removed[e] ? GoldRef{false, holdout_remap[e]}
                            : GoldRef{true, *entity_remap[e]};
    } else {
      // pre-existing held-out labels keep their (copied) indices
    }
  }
  res.gold_partition = out.gold_partition_labels();
  return res;
}

}  // namespace arblink
