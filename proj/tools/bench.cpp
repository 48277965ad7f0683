// Times the OpenMP kernels against the serial references on a synthetic
// corpus. Usage: arblink-bench [mentions [entities [dim [k]]]]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "arblink/knn.hpp"
#include "arblink/metrics.hpp"
#include "arblink/partition.hpp"
#include "arblink/synth.hpp"
#include "serial_kernels.hpp"

using namespace arblink;

namespace {

template <class F>
double time_it(F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  f();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  uint32_t n_mentions = argc > 1 ? uint32_t(std::atoi(argv[1])) : 4000;
  uint32_t n_entities = argc > 2 ? uint32_t(std::atoi(argv[2])) : 800;
  uint32_t dim = argc > 3 ? uint32_t(std::atoi(argv[3])) : 64;
  uint32_t k = argc > 4 ? uint32_t(std::atoi(argv[4])) : 4;

  SynthConfig cfg;
  cfg.n_entities = n_entities;
  cfg.mentions_per_entity = (n_mentions + n_entities - 1) / n_entities;
  cfg.dim = dim;
  cfg.noise_sigma = 0.2;
  cfg.seed = 7;
  Corpus corpus = generate(cfg);
  const EmbeddingStore& store = corpus.store;

  std::printf("corpus: %u mentions, %u entities, dim %u, k=%u, %d threads\n",
              store.mention_count(), store.entity_count(), dim, k,
              omp_get_max_threads());

  WeightedDigraph parallel_graph, serial_graph;
  double t_par = time_it([&] {
    parallel_graph = build_inference_graph(store, {k});
  });
  double t_ser = time_it([&] {
    serial_graph = ref::build_inference_graph(store, k);
  });
  bool same = parallel_graph.edges == serial_graph.edges;
  std::printf("graph build   omp %8.3fs   serial %8.3fs   speedup %.2fx   %s\n",
              t_par, t_ser, t_ser / t_par, same ? "edges agree" : "MISMATCH");

  auto gold = corpus.gold_kb_entity();
  double r_par = 0, r_ser = 0;
  double tr_par = time_it([&] { r_par = recall_at_k(store, gold, 16); });
  double tr_ser = time_it([&] { r_ser = ref::recall_at_k(store, gold, 16); });
  std::printf("recall@16     omp %8.3fs   serial %8.3fs   speedup %.2fx   %s\n",
              tr_par, tr_ser, tr_ser / tr_par,
              r_par == r_ser ? "values agree" : "MISMATCH");

  double tp = time_it([&] {
    partition_graph(parallel_graph, {0.0, Mode::Directed});
  });
  std::printf("partition     %8.3fs (sequential by contract)\n", tp);
  return same && r_par == r_ser ? 0 : 1;
}
