#include <doctest.h>

#include <cmath>

#include "arblink/knn.hpp"
#include "arblink/synth.hpp"

using namespace arblink;

namespace {

SynthConfig small_cfg() {
  SynthConfig cfg;
  cfg.n_entities = 8;
  cfg.mentions_per_entity = 4;
  cfg.dim = 6;
  cfg.center_spread = 1.0;
  cfg.noise_sigma = 1e-4;
  cfg.seed = 4;
  return cfg;
}

}  // namespace

TEST_CASE("near-zero noise puts every mention on its gold entity") {
  Corpus corpus = generate(small_cfg());
  corpus.validate();
  for (uint32_t m = 0; m < corpus.n_mentions(); ++m) {
    auto [e, w] = nearest_entity(corpus.store, m);
    CHECK(e == corpus.mentions[m].gold->index);
  }
}

TEST_CASE("zero holdout leaves no NIL gold labels") {
  Corpus corpus = generate(small_cfg());
  CHECK(corpus.holdout_names.empty());
  for (const MentionRecord& rec : corpus.mentions) {
    REQUIRE(rec.gold.has_value());
    CHECK(rec.gold->in_kb);
  }
}

TEST_CASE("same seed is bit-identical; different seed is not") {
  Corpus a = generate(small_cfg());
  Corpus b = generate(small_cfg());
  CHECK(a.store == b.store);
  SynthConfig other = small_cfg();
  other.seed = 5;
  Corpus c = generate(other);
  CHECK(a.store != c.store);
}

TEST_CASE("holdout flags entities out of the KB but keeps their mentions") {
  SynthConfig cfg = small_cfg();
  cfg.holdout_fraction = 0.25;
  Corpus corpus = generate(cfg);
  corpus.validate();
  CHECK(corpus.n_entities() == 6);
  CHECK(corpus.holdout_names.size() == 2);
  CHECK(corpus.n_mentions() == 32);
  uint32_t nil_gold = 0;
  for (const MentionRecord& rec : corpus.mentions)
    nil_gold += !rec.gold->in_kb;
  CHECK(nil_gold == 8);
  // entity centers sit on the spread sphere
  for (uint32_t e = 0; e < corpus.n_entities(); ++e) {
    auto row = corpus.store.entity_row(e);
    CHECK(std::sqrt(dot_product(row, row)) ==
          doctest::Approx(cfg.center_spread).epsilon(1e-5));
  }
}

TEST_CASE("synth rejects bad configs") {
  SynthConfig cfg = small_cfg();
  cfg.noise_sigma = 0.0;
  CHECK_THROWS_AS(generate(cfg), ConfigError);
  cfg = small_cfg();
  cfg.holdout_fraction = 1.0;
  CHECK_THROWS_AS(generate(cfg), ConfigError);
  cfg = small_cfg();
  cfg.n_entities = 0;
  CHECK_THROWS_AS(generate(cfg), ConfigError);
}

TEST_CASE("well-separated corpora link perfectly via nearest entity") {
  SynthConfig cfg;
  cfg.n_entities = 12;
  cfg.mentions_per_entity = 6;
  cfg.dim = 16;
  cfg.center_spread = 1.0;
  cfg.noise_sigma = 0.02;
  cfg.seed = 9;
  Corpus corpus = generate(cfg);
  for (uint32_t m = 0; m < corpus.n_mentions(); ++m)
    CHECK(nearest_entity(corpus.store, m).first ==
          corpus.mentions[m].gold->index);
}
