#include "arblink/synth.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "arblink/rng.hpp"

namespace arblink {

namespace {

constexpr uint64_t kCenterStream = 0x100000000ull;
constexpr uint64_t kNoiseStream = 0x200000000ull;
constexpr uint64_t kHoldoutStream = 0x300000000ull;

void fill_center(const SynthConfig& cfg, uint32_t entity, double* out) {
  double norm2 = 0.0;
  for (uint32_t d = 0; d < cfg.dim; ++d) {
    out[d] = rng::normal(cfg.seed, kCenterStream | entity, d);
    norm2 += out[d] * out[d];
  }
  double scale = cfg.center_spread / std::sqrt(norm2);
  for (uint32_t d = 0; d < cfg.dim; ++d) out[d] *= scale;
}

}  // namespace

Corpus generate(const SynthConfig& cfg) {
  if (cfg.n_entities == 0 || cfg.mentions_per_entity == 0 || cfg.dim == 0)
    throw ConfigError("synth config requires positive counts and dim");
  if (!(cfg.noise_sigma > 0.0) || !(cfg.center_spread > 0.0))
    throw ConfigError("noise_sigma and center_spread must be > 0");
  if (!(cfg.holdout_fraction >= 0.0 && cfg.holdout_fraction < 1.0))
    throw ConfigError("holdout_fraction must be in [0, 1)");

  uint32_t n_hold = uint32_t(std::llround(cfg.holdout_fraction * cfg.n_entities));
  if (n_hold >= cfg.n_entities)
    throw ConfigError("holdout would remove every entity");

  // Seeded holdout pick: order entities by keyed hash, take the first chunk.
  std::vector<uint32_t> order(cfg.n_entities);
  for (uint32_t e = 0; e < cfg.n_entities; ++e) order[e] = e;
  std::sort(order.begin(), order.end(), [&](uint32_t x, uint32_t y) {
    uint64_t kx = rng::key(cfg.seed, kHoldoutStream, x);
    uint64_t ky = rng::key(cfg.seed, kHoldoutStream, y);
    return kx != ky ? kx < ky : x < y;
  });
  std::vector<char> held(cfg.n_entities, 0);
  for (uint32_t i = 0; i < n_hold; ++i) held[order[i]] = 1;

  uint32_t n_mentions = cfg.n_entities * cfg.mentions_per_entity;
  uint32_t n_kb = cfg.n_entities - n_hold;

  Corpus corpus;
  corpus.store = EmbeddingStore(cfg.dim, n_mentions, n_kb);

  // KB rows and label mapping, in synthetic-entity order.
  std::vector<std::optional<uint32_t>> kb_index(cfg.n_entities);
  std::vector<uint32_t> holdout_index(cfg.n_entities, 0);
  for (uint32_t e = 0; e < cfg.n_entities; ++e) {
    std::string name = "e" + std::to_string(e);
    if (held[e]) {
      holdout_index[e] = uint32_t(corpus.holdout_names.size());
      corpus.holdout_names.push_back(name);
    } else {
      uint32_t dense = uint32_t(corpus.entities.size());
      kb_index[e] = dense;
      corpus.entities.push_back({dense, name, "synthetic"});
      corpus.entity_names.push_back(name);
    }
  }

  std::vector<double> center(cfg.dim);
#pragma omp parallel for schedule(static) firstprivate(center)
  for (int64_t e = 0; e < int64_t(cfg.n_entities); ++e) {
    if (!kb_index[size_t(e)]) continue;
    fill_center(cfg, uint32_t(e), center.data());
    auto row = corpus.store.entity_row(*kb_index[size_t(e)]);
    for (uint32_t d = 0; d < cfg.dim; ++d) row[d] = float(center[d]);
  }

  corpus.mentions.resize(n_mentions);
#pragma omp parallel for schedule(static) firstprivate(center)
  for (int64_t m = 0; m < int64_t(n_mentions); ++m) {
    uint32_t e = uint32_t(m) / cfg.mentions_per_entity;
    fill_center(cfg, e, center.data());
    auto row = corpus.store.mention_row(uint32_t(m));
    for (uint32_t d = 0; d < cfg.dim; ++d) {
      double noise = rng::normal(cfg.seed, kNoiseStream | uint64_t(m), d);
      row[d] = float(center[d] + cfg.noise_sigma * noise);
    }
    MentionRecord rec;
    rec.mention_id = uint32_t(m);
    rec.doc_id = "d" + std::to_string(m / 4);
    rec.gold = held[e] ? GoldRef{false, holdout_index[e]}
                       : GoldRef{true, *kb_index[e]};
    corpus.mentions[size_t(m)] = std::move(rec);
  }
  corpus.mention_names.resize(n_mentions);
  for (uint32_t m = 0; m < n_mentions; ++m)
    corpus.mention_names[m] = "m" + std::to_string(m);
  return corpus;
}

}  // namespace arblink
