#include "arblink/training.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>

#include "arblink/partition.hpp"
#include "arblink/rng.hpp"

namespace arblink {

namespace {

constexpr double kSigmaFloor = 1e-12;
constexpr double kMomentum = 0.9;

double source_affinity(const EmbeddingStore& store, NodeRef src, uint32_t m) {
  auto row = src.is_entity() ? store.entity_row(src.id)
                             : store.mention_row(src.id);
  return dot_product(row, store.mention_row(m));
}

// Softmax probabilities over the term's sources (positive first), with the
// usual max-subtraction.
std::vector<double> term_sigmas(const std::vector<double>& affinities) {
  double hi = affinities[0];
  for (double a : affinities) hi = std::max(hi, a);
  std::vector<double> sig(affinities.size());
  double z = 0.0;
  for (size_t i = 0; i < affinities.size(); ++i) {
    sig[i] = std::exp(affinities[i] - hi);
    z += sig[i];
  }
  for (double& s : sig) s /= z;
  return sig;
}

// One-sided guards: the positive's log needs sigma floored away from 0,
// each negative's log1p needs sigma capped away from 1. Saturated-correct
// terms stay exactly zero.
double floor_sigma(double s) { return std::max(kSigmaFloor, s); }
double cap_sigma(double s) { return std::min(1.0 - kSigmaFloor, s); }

}  // namespace

TrainingData TrainingData::from_corpus(const Corpus& corpus) {
  TrainingData data;
  data.n_entities = corpus.n_entities();
  data.gold = corpus.gold_kb_entity();
  data.entity_mentions.resize(corpus.n_entities());
  for (uint32_t m = 0; m < corpus.n_mentions(); ++m) {
    if (data.gold[m]) {
      data.mentions.push_back(m);
      data.entity_mentions[*data.gold[m]].push_back(m);
    }
  }
  return data;
}

WeightedDigraph batch_candidate_edges(const std::vector<uint32_t>& batch,
                                      const TrainingData& data,
                                      const EmbeddingStore& store) {
  std::set<uint32_t> labels;
  for (uint32_t m : batch) {
    if (m >= data.gold.size() || !data.gold[m])
      throw DataError("batch mention " + std::to_string(m) +
                      " has no KB gold entity");
    labels.insert(*data.gold[m]);
  }
  WeightedDigraph g;
  for (uint32_t e : labels) {
    g.nodes.push_back(NodeRef::entity(e));
    for (uint32_t m : data.entity_mentions[e])
      g.nodes.push_back(NodeRef::mention(m));
  }
  std::sort(g.nodes.begin(), g.nodes.end());
  for (uint32_t e : labels) {
    const auto& members = data.entity_mentions[e];
    for (uint32_t m : members)
      g.edges.push_back({NodeRef::entity(e), NodeRef::mention(m),
                         edge_weight(affinity_me(store, e, m))});
    for (uint32_t a : members)
      for (uint32_t b : members)
        if (a != b)
          g.edges.push_back({NodeRef::mention(a), NodeRef::mention(b),
                             edge_weight(affinity_mm(store, a, b))});
  }
  return g;
}

std::vector<Edge> target_forest(const WeightedDigraph& candidates) {
  // Validate the one-entity-per-component precondition before partitioning.
  {
    AdjacencyIndex adj(candidates);
    std::vector<int> comp(candidates.nodes.size(), -1);
    int next = 0;
    for (size_t s = 0; s < comp.size(); ++s) {
      if (comp[s] >= 0) continue;
      int entities = 0;
      std::vector<size_t> stack{s};
      comp[s] = next;
      while (!stack.empty()) {
        size_t x = stack.back();
        stack.pop_back();
        if (candidates.nodes[x].is_entity()) ++entities;
        auto visit = [&](size_t y) {
          if (comp[y] < 0) {
            comp[y] = next;
            stack.push_back(y);
          }
        };
        for (uint32_t ei : adj.out(x))
          visit(candidates.node_index(candidates.edges[ei].dst));
        for (uint32_t ei : adj.in(x))
          visit(candidates.node_index(candidates.edges[ei].src));
      }
      if (entities != 1)
        throw ContractError("candidate component must hold exactly 1 entity, got " +
                            std::to_string(entities));
      ++next;
    }
  }
  PartitionResult res =
      partition_graph(candidates, {kInf, Mode::Directed});
  return res.pruned.edges;
}

std::vector<NodeRef> mine_negatives(const EmbeddingStore& store, uint32_t m,
                                    const TrainingData& data, uint32_t neg_k) {
  if (neg_k == 0 || neg_k % 2 != 0)
    throw ConfigError("neg_k must be a positive even integer");
  if (m >= data.gold.size() || !data.gold[m])
    throw DataError("mention " + std::to_string(m) + " has no KB gold entity");
  uint32_t gold = *data.gold[m];
  uint32_t half = neg_k / 2;
  auto query = store.mention_row(m);

  using Key = std::pair<double, uint32_t>;
  auto top_k = [half](auto&& candidates) {
    std::priority_queue<Key> heap;
    candidates([&](Key cand) {
      if (heap.size() < half) {
        heap.push(cand);
      } else if (half > 0 && cand < heap.top()) {
        heap.pop();
        heap.push(cand);
      }
    });
    std::vector<Key> out(heap.size());
    for (size_t i = out.size(); i-- > 0;) {
      out[i] = heap.top();
      heap.pop();
    }
    return out;
  };

  auto entity_keys = top_k([&](auto&& push) {
    for (uint32_t e = 0; e < store.entity_count(); ++e) {
      if (e == gold) continue;
      push({-dot_product(store.entity_row(e), query), e});
    }
  });
  auto mention_keys = top_k([&](auto&& push) {
    for (uint32_t j : data.mentions) {
      if (*data.gold[j] == gold) continue;  // excludes m itself too
      push({-dot_product(store.mention_row(j), query), j});
    }
  });

  if (entity_keys.size() < half)
    warn("entity negative pool clamped to " +
         std::to_string(entity_keys.size()) + " for mention " +
         std::to_string(m));
  if (mention_keys.size() < half)
    warn("mention negative pool clamped to " +
         std::to_string(mention_keys.size()) + " for mention " +
         std::to_string(m));

  std::vector<NodeRef> out;
  for (const Key& k : entity_keys) out.push_back(NodeRef::entity(k.second));
  for (const Key& k : mention_keys) out.push_back(NodeRef::mention(k.second));
  return out;
}

namespace {

// Seeded random sources replacing the hard pools; used by the ablation
// trainer only.
std::vector<NodeRef> random_negatives(uint32_t m, const TrainingData& data,
                                      const EmbeddingStore& store,
                                      uint32_t neg_k, uint64_t seed,
                                      uint64_t stream) {
  uint32_t gold = *data.gold[m];
  uint32_t half = neg_k / 2;
  std::vector<uint32_t> entity_pool;
  for (uint32_t e = 0; e < store.entity_count(); ++e)
    if (e != gold) entity_pool.push_back(e);
  std::vector<uint32_t> mention_pool;
  for (uint32_t j : data.mentions)
    if (*data.gold[j] != gold) mention_pool.push_back(j);

  auto draw = [&](std::vector<uint32_t>& pool, uint64_t tag, size_t want,
                  auto make) {
    std::vector<NodeRef> picked;
    uint64_t counter = 0;
    std::set<uint32_t> used;
    while (picked.size() < want && used.size() < pool.size()) {
      uint32_t cand = pool[size_t(
          rng::below(seed, stream ^ tag ^ (uint64_t(m) << 20), counter++,
                     pool.size()))];
      if (used.insert(cand).second) picked.push_back(make(cand));
    }
    return picked;
  };
  std::vector<NodeRef> out =
      draw(entity_pool, 0x45u, half, [](uint32_t e) { return NodeRef::entity(e); });
  for (NodeRef n :
       draw(mention_pool, 0x4du, half, [](uint32_t j) { return NodeRef::mention(j); }))
    out.push_back(n);
  if (out.size() < size_t(neg_k))
    warn("random negative pool clamped for mention " + std::to_string(m));
  return out;
}

}  // namespace

TrainBatchGraph build_train_batch(const std::vector<uint32_t>& batch,
                                  const TrainingData& data,
                                  const EmbeddingStore& store,
                                  const TrainConfig& cfg,
                                  uint64_t draw_stream) {
  TrainBatchGraph tb;
  tb.batch = batch;
  tb.candidates = batch_candidate_edges(batch, data, store);
  tb.target_edges = target_forest(tb.candidates);

  if (cfg.neg_k == 0 || cfg.neg_k % 2 != 0)
    throw ConfigError("neg_k must be a positive even integer");

  std::map<uint32_t, NodeRef> positive;
  for (const Edge& e : tb.target_edges) positive[e.dst.id] = e.src;

  tb.terms.resize(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    tb.terms[i].mention = batch[i];
    auto it = positive.find(batch[i]);
    if (it == positive.end())
      throw ContractError("target forest misses batch mention " +
                          std::to_string(batch[i]));
    tb.terms[i].positive = it->second;
  }
  // Mining cannot throw past this point: neg_k and gold labels are
  // validated above and by batch_candidate_edges.
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < int64_t(batch.size()); ++i) {
    uint32_t m = batch[size_t(i)];
    tb.terms[size_t(i)].negatives =
        cfg.negatives == NegativeMode::Hard
            ? mine_negatives(store, m, data, cfg.neg_k)
            : random_negatives(m, data, store, cfg.neg_k, cfg.seed, draw_stream);
  }
  return tb;
}

namespace {

// Bounds-check every row a batch touches so the parallel loops below can
// run without throwing.
void check_terms(const TrainBatchGraph& tb, const EmbeddingStore& store) {
  if (tb.terms.empty()) throw ContractError("batch has no mentions");
  auto check = [&](NodeRef n) {
    uint32_t limit =
        n.is_entity() ? store.entity_count() : store.mention_count();
    if (n.id >= limit)
      throw LookupError("row " + to_string(n) + " out of range");
  };
  for (const BatchMentionTerm& t : tb.terms) {
    check(NodeRef::mention(t.mention));
    check(t.positive);
    for (NodeRef n : t.negatives) check(n);
  }
}

}  // namespace

double batch_loss(const TrainBatchGraph& tb, const EmbeddingStore& store) {
  check_terms(tb, store);
  std::vector<double> losses(tb.terms.size());
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < int64_t(tb.terms.size()); ++i) {
    const BatchMentionTerm& t = tb.terms[size_t(i)];
    std::vector<double> aff{source_affinity(store, t.positive, t.mention)};
    for (NodeRef n : t.negatives)
      aff.push_back(source_affinity(store, n, t.mention));
    std::vector<double> sig = term_sigmas(aff);
    double l = -std::log(floor_sigma(sig[0]));
    for (size_t j = 1; j < sig.size(); ++j)
      l -= std::log1p(-cap_sigma(sig[j]));
    losses[size_t(i)] = l;
  }
  double sum = 0.0;
  for (double l : losses) sum += l;  // fixed batch order
  return sum / double(tb.terms.size());
}

BatchGradient batch_loss_gradient(const TrainBatchGraph& tb,
                                  const EmbeddingStore& store) {
  check_terms(tb, store);
  uint32_t dim = store.dim();
  double scale = 1.0 / double(tb.terms.size());

  // Per-term source coefficients dL/da_u, computed independently.
  std::vector<std::vector<double>> coeffs(tb.terms.size());
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < int64_t(tb.terms.size()); ++i) {
    const BatchMentionTerm& t = tb.terms[size_t(i)];
    std::vector<double> aff{source_affinity(store, t.positive, t.mention)};
    for (NodeRef n : t.negatives)
      aff.push_back(source_affinity(store, n, t.mention));
    std::vector<double> sig = term_sigmas(aff);
    // L = -sum_u [y_u log s_u + (1-y_u) log(1-s_u)];
    // dL/da_t = -s_t * (g_t - sum_u g_u s_u) with g_u = y/s - (1-y)/(1-s).
    std::vector<double> g(sig.size());
    double mix = 0.0;
    for (size_t u = 0; u < sig.size(); ++u) {
      g[u] = (u == 0) ? 1.0 / floor_sigma(sig[u])
                      : -1.0 / (1.0 - cap_sigma(sig[u]));
      mix += g[u] * sig[u];
    }
    std::vector<double> c(sig.size());
    for (size_t u = 0; u < sig.size(); ++u)
      c[u] = -sig[u] * (g[u] - mix) * scale;
    coeffs[size_t(i)] = std::move(c);
  }

  // Deterministic reduction in batch order.
  std::map<NodeRef, std::vector<double>> acc;
  auto row_of = [&](NodeRef n) {
    return n.is_entity() ? store.entity_row(n.id) : store.mention_row(n.id);
  };
  auto add_scaled = [&](NodeRef target, double c, std::span<const float> vec) {
    auto it = acc.try_emplace(target, dim, 0.0).first;
    for (uint32_t d = 0; d < dim; ++d) it->second[d] += c * double(vec[d]);
  };
  for (size_t i = 0; i < tb.terms.size(); ++i) {
    const BatchMentionTerm& t = tb.terms[i];
    NodeRef mention = NodeRef::mention(t.mention);
    std::vector<NodeRef> sources{t.positive};
    for (NodeRef n : t.negatives) sources.push_back(n);
    for (size_t u = 0; u < sources.size(); ++u) {
      double c = coeffs[i][u];
      add_scaled(sources[u], c, store.mention_row(t.mention));
      add_scaled(mention, c, row_of(sources[u]));
    }
  }

  BatchGradient out;
  out.rows.assign(acc.begin(), acc.end());
  return out;
}

const std::vector<double>* BatchGradient::find(NodeRef row) const {
  auto it = std::lower_bound(
      rows.begin(), rows.end(), row,
      [](const auto& a, NodeRef b) { return a.first < b; });
  if (it == rows.end() || it->first != row) return nullptr;
  return &it->second;
}

TrainResult train(const TrainingData& data, const TrainConfig& cfg,
                  EmbeddingStore& store) {
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (cfg.epochs == 0) throw ConfigError("epochs must be positive");
  if (cfg.neg_k == 0 || cfg.neg_k % 2 != 0)
    throw ConfigError("neg_k must be a positive even integer");
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
    throw ConfigError("learning_rate must be a finite non-negative real");
  if (data.mentions.empty()) throw DataError("no labeled training mentions");

  uint32_t dim = store.dim();
  std::vector<double> vel_m(size_t(store.mention_count()) * dim, 0.0);
  std::vector<double> vel_e(size_t(store.entity_count()) * dim, 0.0);

  TrainResult result;
  for (uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<uint32_t> order = data.mentions;
    rng::shuffle(order, cfg.seed, 0x5e5eull ^ epoch);

    double loss_sum = 0.0;
    size_t loss_count = 0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<uint32_t> batch(order.begin() + start, order.begin() + end);
      uint64_t stream = (uint64_t(epoch) << 32) | uint64_t(start);
      TrainBatchGraph tb = build_train_batch(batch, data, store, cfg, stream);
      double loss = batch_loss(tb, store);
      if (!std::isfinite(loss))
        throw DivergenceError("non-finite loss at epoch " +
                              std::to_string(epoch) + ", batch offset " +
                              std::to_string(start));
      loss_sum += loss * double(batch.size());
      loss_count += batch.size();
      ++result.batches;

      BatchGradient grad = batch_loss_gradient(tb, store);
      bool finite = true;
      for (const auto& [row, g] : grad.rows) {
        double* vel = row.is_entity() ? &vel_e[size_t(row.id) * dim]
                                      : &vel_m[size_t(row.id) * dim];
        std::span<float> x = row.is_entity() ? store.entity_row(row.id)
                                             : store.mention_row(row.id);
        for (uint32_t d = 0; d < dim; ++d) {
          vel[d] = kMomentum * vel[d] - cfg.learning_rate * g[d];
          x[d] = float(double(x[d]) + vel[d]);
          finite &= std::isfinite(x[d]);
        }
      }
      if (!finite)
        throw DivergenceError("parameters overflowed at epoch " +
                              std::to_string(epoch) + ", batch offset " +
                              std::to_string(start));
    }
    result.epoch_loss.push_back(loss_sum / double(loss_count));
  }
  return result;
}

}  // namespace arblink
