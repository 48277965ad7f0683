#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "arblink/training.hpp"
#include "oracles.hpp"

using namespace arblink;

namespace {

TrainingData labels_of(uint32_t n_entities,
                       const std::vector<uint32_t>& gold_per_mention) {
  TrainingData data;
  data.n_entities = n_entities;
  data.entity_mentions.resize(n_entities);
  for (uint32_t m = 0; m < gold_per_mention.size(); ++m) {
    data.gold.push_back(gold_per_mention[m]);
    data.mentions.push_back(m);
    data.entity_mentions[gold_per_mention[m]].push_back(m);
  }
  return data;
}

// Random single-entity candidate component shaped like the batch graphs:
// entity -> every mention, all ordered mention pairs.
WeightedDigraph random_component(std::mt19937& gen, uint32_t n_mentions) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  WeightedDigraph g;
  g.nodes = dense_nodes(1, n_mentions);
  for (uint32_t m = 0; m < n_mentions; ++m)
    g.edges.push_back({NodeRef::entity(0), NodeRef::mention(m), u(gen)});
  for (uint32_t a = 0; a < n_mentions; ++a)
    for (uint32_t b = 0; b < n_mentions; ++b)
      if (a != b)
        g.edges.push_back({NodeRef::mention(a), NodeRef::mention(b), u(gen)});
  return g;
}

TrainBatchGraph manual_batch(const std::vector<BatchMentionTerm>& terms) {
  TrainBatchGraph tb;
  for (const BatchMentionTerm& t : terms) tb.batch.push_back(t.mention);
  tb.terms = terms;
  return tb;
}

}  // namespace

TEST_CASE("candidate edges for two coreferent mentions") {
  std::mt19937 gen(51);
  auto store = oracles::random_store(gen, 2, 1, 4);
  auto data = labels_of(1, {0, 0});
  WeightedDigraph g = batch_candidate_edges({0, 1}, data, store);
  g.validate();
  REQUIRE(g.edges.size() == 4);
  std::set<std::pair<NodeRef, NodeRef>> arcs;
  for (const Edge& e : g.edges) {
    arcs.insert({e.src, e.dst});
    double aff = e.src.is_entity() ? affinity_me(store, e.src.id, e.dst.id)
                                   : affinity_mm(store, e.src.id, e.dst.id);
    CHECK(e.weight == -aff);
  }
  CHECK(arcs == std::set<std::pair<NodeRef, NodeRef>>{
                    {NodeRef::entity(0), NodeRef::mention(0)},
                    {NodeRef::entity(0), NodeRef::mention(1)},
                    {NodeRef::mention(0), NodeRef::mention(1)},
                    {NodeRef::mention(1), NodeRef::mention(0)}});
}

TEST_CASE("candidate edges for a lone mention") {
  std::mt19937 gen(52);
  auto store = oracles::random_store(gen, 1, 1, 4);
  auto data = labels_of(1, {0});
  WeightedDigraph g = batch_candidate_edges({0}, data, store);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].src == NodeRef::entity(0));
}

TEST_CASE("candidate edges keep label components disjoint") {
  std::mt19937 gen(53);
  auto store = oracles::random_store(gen, 4, 2, 4);
  auto data = labels_of(2, {0, 0, 1, 1});
  WeightedDigraph g = batch_candidate_edges({0, 2}, data, store);
  CHECK(g.edges.size() == 8);
  for (const Edge& e : g.edges) {
    uint32_t label_src = e.src.is_entity() ? e.src.id : *data.gold[e.src.id];
    CHECK(label_src == *data.gold[e.dst.id]);
  }
}

TEST_CASE("candidate edges require KB gold labels") {
  std::mt19937 gen(54);
  auto store = oracles::random_store(gen, 2, 1, 4);
  TrainingData data = labels_of(1, {0, 0});
  data.gold[1] = std::nullopt;
  CHECK_THROWS_AS(batch_candidate_edges({1}, data, store), DataError);
}

TEST_CASE("target forest keeps the light chain") {
  WeightedDigraph g;
  g.nodes = dense_nodes(1, 2);
  g.edges = {{NodeRef::entity(0), NodeRef::mention(0), 0.1},
             {NodeRef::entity(0), NodeRef::mention(1), 0.5},
             {NodeRef::mention(0), NodeRef::mention(1), 0.2},
             {NodeRef::mention(1), NodeRef::mention(0), 0.9}};
  std::vector<Edge> forest = target_forest(g);
  std::set<std::pair<NodeRef, NodeRef>> arcs;
  for (const Edge& e : forest) arcs.insert({e.src, e.dst});
  CHECK(arcs == std::set<std::pair<NodeRef, NodeRef>>{
                    {NodeRef::entity(0), NodeRef::mention(0)},
                    {NodeRef::mention(0), NodeRef::mention(1)}});
}

TEST_CASE("target forest of a lone mention keeps its entity edge") {
  WeightedDigraph g;
  g.nodes = dense_nodes(1, 1);
  g.edges = {{NodeRef::entity(0), NodeRef::mention(0), 0.3}};
  std::vector<Edge> forest = target_forest(g);
  REQUIRE(forest.size() == 1);
  CHECK(forest[0].src == NodeRef::entity(0));
}

TEST_CASE("target forest rejects multi-entity components") {
  WeightedDigraph g;
  g.nodes = dense_nodes(2, 1);
  g.edges = {{NodeRef::entity(0), NodeRef::mention(0), 0.3},
             {NodeRef::entity(1), NodeRef::mention(0), 0.4}};
  CHECK_THROWS_AS(target_forest(g), ContractError);
}

TEST_CASE("target forest is a minimum-bottleneck spanning arborescence") {
  std::mt19937 gen(55);
  for (int t = 0; t < 60; ++t) {
    uint32_t c = 1 + gen() % 6;
    WeightedDigraph g = random_component(gen, c);
    std::vector<Edge> forest = target_forest(g);
    CHECK(forest.size() == c);  // |edges| = |mentions|
    std::map<uint32_t, int> in_deg;
    double bottleneck = -kInf;
    WeightedDigraph pruned;
    pruned.nodes = g.nodes;
    pruned.edges = forest;
    for (const Edge& e : forest) {
      ++in_deg[e.dst.id];
      bottleneck = std::max(bottleneck, e.weight);
    }
    for (uint32_t m = 0; m < c; ++m) {
      CHECK(in_deg[m] == 1);
      CHECK(reachable(pruned, NodeRef::entity(0), NodeRef::mention(m),
                      Mode::Directed));
    }
    CHECK(bottleneck == oracles::min_bottleneck_arborescence(g));
  }
}

TEST_CASE("hard negatives match an exhaustive scan") {
  // 3 entities, gold e0; 4 mentions, m0/m1 coreferent, m2/m3 not.
  auto store = oracles::make_store(
      1, {{1.0f}, {0.9f}, {0.8f}, {-0.5f}}, {{1.0f}, {0.7f}, {0.2f}});
  auto data = labels_of(3, {0, 0, 1, 2});
  auto negs = mine_negatives(store, 0, data, 2);
  // hardest wrong entity for m0=[1]: e1 (affinity .7 beats .2);
  // hardest non-coreferent mention: m2 (affinity .8 beats -.5)
  CHECK(negs == std::vector<NodeRef>{NodeRef::entity(1), NodeRef::mention(2)});

  std::mt19937 gen(56);
  for (int t = 0; t < 40; ++t) {
    uint32_t nm = 4 + gen() % 8, ne = 2 + gen() % 5;
    auto s = oracles::random_store(gen, nm, ne, 5);
    std::vector<uint32_t> gold(nm);
    for (auto& g : gold) g = gen() % ne;
    auto d = labels_of(ne, gold);
    uint32_t m = gen() % nm;
    uint32_t neg_k = 2 + 2 * (gen() % 2);
    auto got = mine_negatives(s, m, d, neg_k);
    // oracle: full sort of each pool
    std::vector<std::pair<double, uint32_t>> epool, mpool;
    for (uint32_t e = 0; e < ne; ++e)
      if (e != gold[m])
        epool.push_back({-oracles::naive_dot(s.entity_row(e), s.mention_row(m)), e});
    for (uint32_t j = 0; j < nm; ++j)
      if (gold[j] != gold[m])
        mpool.push_back({-oracles::naive_dot(s.mention_row(j), s.mention_row(m)), j});
    std::sort(epool.begin(), epool.end());
    std::sort(mpool.begin(), mpool.end());
    std::vector<NodeRef> want;
    for (uint32_t i = 0; i < std::min<size_t>(neg_k / 2, epool.size()); ++i)
      want.push_back(NodeRef::entity(epool[i].second));
    for (uint32_t i = 0; i < std::min<size_t>(neg_k / 2, mpool.size()); ++i)
      want.push_back(NodeRef::mention(mpool[i].second));
    CHECK(got == want);
  }
}

TEST_CASE("negative ties break toward the lower id") {
  auto store = oracles::make_store(1, {{1.0f}}, {{1.0f}, {0.5f}, {0.5f}});
  auto data = labels_of(3, {0});
  auto negs = mine_negatives(store, 0, data, 2);
  REQUIRE(negs.size() >= 1);
  CHECK(negs[0] == NodeRef::entity(1));
}

TEST_CASE("negatives clamp when a pool is empty") {
  auto store = oracles::make_store(1, {{1.0f}, {0.9f}}, {{1.0f}, {0.5f}});
  auto data = labels_of(2, {0, 0});  // no non-coreferent mentions
  auto negs = mine_negatives(store, 0, data, 2);
  CHECK(negs == std::vector<NodeRef>{NodeRef::entity(1)});
}

TEST_CASE("negatives never include gold-coreferent sources") {
  std::mt19937 gen(57);
  for (int t = 0; t < 20; ++t) {
    uint32_t nm = 6 + gen() % 10, ne = 2 + gen() % 4;
    auto s = oracles::random_store(gen, nm, ne, 4);
    std::vector<uint32_t> gold(nm);
    for (auto& g : gold) g = gen() % ne;
    auto d = labels_of(ne, gold);
    uint32_t m = gen() % nm;
    for (NodeRef n : mine_negatives(s, m, d, 4)) {
      if (n.is_entity()) CHECK(n.id != gold[m]);
      else CHECK(gold[n.id] != gold[m]);
    }
  }
}

TEST_CASE("batch loss on the frozen two-source example") {
  auto store = oracles::make_store(1, {{1.0f}}, {{2.0f}, {1.0f}});
  auto tb = manual_batch(
      {{0, NodeRef::entity(0), {NodeRef::entity(1)}}});
  double loss = batch_loss(tb, store);
  double sigma = std::exp(2.0) / (std::exp(2.0) + std::exp(1.0));
  CHECK(loss == doctest::Approx(-2.0 * std::log(sigma)).epsilon(1e-12));
  CHECK(loss == doctest::Approx(0.62652).epsilon(1e-4));
}

TEST_CASE("batch loss with only the positive is zero") {
  auto store = oracles::make_store(1, {{1.0f}}, {{2.0f}});
  auto tb = manual_batch({{0, NodeRef::entity(0), {}}});
  CHECK(batch_loss(tb, store) == 0.0);
}

TEST_CASE("batch loss at equal affinities is 2 ln 2") {
  auto store = oracles::make_store(1, {{1.0f}}, {{1.0f}, {1.0f}});
  auto tb = manual_batch({{0, NodeRef::entity(0), {NodeRef::entity(1)}}});
  CHECK(batch_loss(tb, store) ==
        doctest::Approx(1.3862943611198906).epsilon(1e-12));
}

TEST_CASE("batch loss rejects an empty batch") {
  auto store = oracles::make_store(1, {{1.0f}}, {{1.0f}});
  TrainBatchGraph tb;
  CHECK_THROWS_AS(batch_loss(tb, store), ContractError);
}

TEST_CASE("batch loss is non-negative; zero only at saturated positives") {
  std::mt19937 gen(58);
  for (int t = 0; t < 30; ++t) {
    uint32_t nm = 3 + gen() % 6, ne = 2 + gen() % 4;
    auto s = oracles::random_store(gen, nm, ne, 4);
    std::vector<BatchMentionTerm> terms;
    for (uint32_t m = 0; m < nm; ++m) {
      BatchMentionTerm t1{m, NodeRef::entity(gen() % ne), {}};
      uint32_t negs = gen() % 3;
      for (uint32_t i = 0; i < negs; ++i)
        t1.negatives.push_back(NodeRef::entity(gen() % ne));
      terms.push_back(t1);
    }
    CHECK(batch_loss(manual_batch(terms), s) >= 0.0);
  }
}

TEST_CASE("gradient is zero for saturated positive-only terms") {
  auto store = oracles::make_store(2, {{1.0f, 0.0f}}, {{3.0f, 1.0f}});
  auto tb = manual_batch({{0, NodeRef::entity(0), {}}});
  BatchGradient g = batch_loss_gradient(tb, store);
  for (const auto& [row, vec] : g.rows)
    for (double x : vec) CHECK(x == 0.0);
}

TEST_CASE("gradient leaves untouched rows at zero") {
  std::mt19937 gen(59);
  auto store = oracles::random_store(gen, 5, 3, 4);
  auto tb = manual_batch({{0, NodeRef::entity(0), {NodeRef::entity(1)}}});
  BatchGradient g = batch_loss_gradient(tb, store);
  CHECK(g.find(NodeRef::mention(3)) == nullptr);
  CHECK(g.find(NodeRef::entity(2)) == nullptr);
  CHECK(g.find(NodeRef::mention(0)) != nullptr);
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937 gen(60);
  for (int t = 0; t < 8; ++t) {
    uint32_t nm = 3 + gen() % 8, ne = 2 + gen() % 3;
    auto store = oracles::random_store(gen, nm, ne, 8);
    std::vector<uint32_t> gold(nm);
    for (auto& g : gold) g = gen() % ne;
    auto data = labels_of(ne, gold);
    std::vector<uint32_t> batch;
    for (uint32_t m = 0; m < nm; ++m) batch.push_back(m);
    TrainConfig cfg;
    cfg.neg_k = 4;
    TrainBatchGraph tb = build_train_batch(batch, data, store, cfg, 0);
    BatchGradient grad = batch_loss_gradient(tb, store);

    const double h = 1e-4;
    for (const auto& [row, g] : grad.rows) {
      for (uint32_t d = 0; d < store.dim(); ++d) {
        EmbeddingStore plus = store, minus = store;
        auto get_row = [&](EmbeddingStore& s) {
          return row.is_entity() ? s.entity_row(row.id) : s.mention_row(row.id);
        };
        float base = get_row(plus)[d];
        get_row(plus)[d] = float(double(base) + h);
        get_row(minus)[d] = float(double(base) - h);
        // evaluate at the representable points; divide by the realized step
        double step = double(get_row(plus)[d]) - double(get_row(minus)[d]);
        double fd = (batch_loss(tb, plus) - batch_loss(tb, minus)) / step;
        double denom = std::max({std::abs(fd), std::abs(g[d]), 1e-8});
        CHECK(std::abs(fd - g[d]) / denom < 1e-4);
      }
    }
  }
}

TEST_CASE("zero learning rate leaves the store bit-exact") {
  std::mt19937 gen(61);
  auto store = oracles::random_store(gen, 8, 3, 4);
  std::vector<uint32_t> gold = {0, 0, 1, 1, 2, 2, 0, 1};
  auto data = labels_of(3, gold);
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.neg_k = 2;
  cfg.epochs = 3;
  cfg.learning_rate = 0.0;
  EmbeddingStore before = store;
  train(data, cfg, store);
  CHECK(store == before);
}

TEST_CASE("fixed seed reproduces the loss history bit-for-bit") {
  std::mt19937 gen(62);
  auto base = oracles::random_store(gen, 10, 3, 6);
  std::vector<uint32_t> gold = {0, 0, 0, 1, 1, 1, 2, 2, 2, 0};
  auto data = labels_of(3, gold);
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.neg_k = 2;
  cfg.epochs = 4;
  cfg.learning_rate = 0.05;
  cfg.seed = 99;
  EmbeddingStore s1 = base, s2 = base;
  TrainResult r1 = train(data, cfg, s1);
  TrainResult r2 = train(data, cfg, s2);
  CHECK(r1.epoch_loss == r2.epoch_loss);
  CHECK(s1 == s2);
}

TEST_CASE("diverging training aborts with a diagnostic") {
  std::mt19937 gen(63);
  auto store = oracles::random_store(gen, 8, 2, 4);
  std::vector<uint32_t> gold = {0, 0, 0, 0, 1, 1, 1, 1};
  auto data = labels_of(2, gold);
  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.neg_k = 2;
  cfg.epochs = 60;
  cfg.learning_rate = 1e45;  // first update overflows f32 storage
  CHECK_THROWS_AS(train(data, cfg, store), DivergenceError);
}
