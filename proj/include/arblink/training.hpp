#pragma once
// Supervised arborescence training over free embedding parameters: batch
// candidate graphs, target forests from the lambda=inf directed partition,
// hard-negative mining, the softmax edge loss, analytic gradients, and a
// momentum gradient-descent trainer.

#include <cstdint>
#include <optional>
#include <vector>

#include "arblink/corpus.hpp"
#include "arblink/types.hpp"

namespace arblink {

enum class NegativeMode { Hard, RandomSource };

struct TrainConfig {
  uint32_t batch_size = 128;
  uint32_t neg_k = 4;  // per-mention negatives, split between entity/mention pools
  uint32_t epochs = 5;
  double learning_rate = 0.05;
  uint64_t seed = 0;
  NegativeMode negatives = NegativeMode::Hard;
};

// Label view the trainer works from: only mentions whose gold entity is in
// the KB participate in batches and negative pools.
struct TrainingData {
  std::vector<uint32_t> mentions;  // trainable mentions, ascending
  std::vector<std::optional<uint32_t>> gold;  // per corpus mention
  std::vector<std::vector<uint32_t>> entity_mentions;  // per KB entity
  uint32_t n_entities = 0;

  static TrainingData from_corpus(const Corpus& corpus);
};

// Candidate positive edges for a mini-batch: each batch mention's gold
// entity, every mention coreferent with it, edges entity->mention and all
// ordered coreferent mention pairs. Every component holds exactly one
// entity. DataError when a batch mention has no KB gold.
WeightedDigraph batch_candidate_edges(const std::vector<uint32_t>& batch,
                                      const TrainingData& data,
                                      const EmbeddingStore& store);

// Target edge set E*: the lambda=inf directed partition of the candidate
// graph. Per component a spanning arborescence rooted at the entity; every
// mention in-degree exactly 1. ContractError on a multi-entity component.
std::vector<Edge> target_forest(const WeightedDigraph& candidates);

// Hard negatives for mention m: neg_k/2 lowest-weight incoming sources
// from wrong entities plus neg_k/2 from non-coreferent mentions; ties by
// id; clamped with a warning when a pool is short.
std::vector<NodeRef> mine_negatives(const EmbeddingStore& store, uint32_t m,
                                    const TrainingData& data, uint32_t neg_k);

// Per-batch-mention loss term inputs: the single positive source and the
// mined negative sources.
struct BatchMentionTerm {
  uint32_t mention = 0;
  NodeRef positive;
  std::vector<NodeRef> negatives;
};

struct TrainBatchGraph {
  std::vector<uint32_t> batch;
  WeightedDigraph candidates;
  std::vector<Edge> target_edges;
  std::vector<BatchMentionTerm> terms;  // batch order
};

// Assembles candidates, E*, and negatives against the current store.
// `draw_stream` seeds random-source negatives (NegativeMode::RandomSource).
TrainBatchGraph build_train_batch(const std::vector<uint32_t>& batch,
                                  const TrainingData& data,
                                  const EmbeddingStore& store,
                                  const TrainConfig& cfg,
                                  uint64_t draw_stream);

// Mean over batch mentions of the negated softmax edge loss: softmax over
// source affinities within Gamma(m), log-likelihood of the positive plus
// log(1 - sigma) of each negative. ContractError on an empty Gamma.
double batch_loss(const TrainBatchGraph& tb, const EmbeddingStore& store);

struct BatchGradient {
  // Sorted by row; rows not present have zero gradient.
  std::vector<std::pair<NodeRef, std::vector<double>>> rows;
  const std::vector<double>* find(NodeRef row) const;
};

// Exact analytic gradient of batch_loss with respect to every embedding
// row appearing in any term.
BatchGradient batch_loss_gradient(const TrainBatchGraph& tb,
                                  const EmbeddingStore& store);

struct TrainResult {
  std::vector<double> epoch_loss;  // mention-weighted mean per epoch
  uint64_t batches = 0;
};

// Mini-batch momentum gradient descent over the store's rows. Batches are
// contiguous slices of a per-epoch seeded shuffle; E* and negatives are
// recomputed per batch against current parameters. DivergenceError on a
// non-finite loss.
TrainResult train(const TrainingData& data, const TrainConfig& cfg,
                  EmbeddingStore& store);

}  // namespace arblink
