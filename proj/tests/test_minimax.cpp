#include <doctest.h>

#include <random>

#include "arblink/minimax.hpp"
#include "oracles.hpp"

using namespace arblink;

namespace {

WeightedDigraph two_node(double w) {
  WeightedDigraph g;
  g.nodes = dense_nodes(0, 2);
  g.edges = {{NodeRef::mention(0), NodeRef::mention(1), w}};
  return g;
}

}  // namespace

TEST_CASE("reachable on a single edge") {
  WeightedDigraph g = two_node(0.3);
  NodeRef a = NodeRef::mention(0), b = NodeRef::mention(1);
  CHECK(reachable(g, a, b, Mode::Directed));
  CHECK_FALSE(reachable(g, b, a, Mode::Directed));
  CHECK(reachable(g, a, b, Mode::Undirected));
  CHECK(reachable(g, b, a, Mode::Undirected));
  CHECK(reachable(g, a, a, Mode::Directed));
  CHECK_THROWS_AS(reachable(g, a, NodeRef::mention(9), Mode::Directed),
                  LookupError);
}

TEST_CASE("reachable agrees with the transitive-closure oracle") {
  std::mt19937 gen(31);
  for (int t = 0; t < 200; ++t) {
    uint32_t n = 2 + gen() % 7;
    WeightedDigraph g = oracles::random_digraph(gen, n, 0.3);
    for (Mode mode : {Mode::Directed, Mode::Undirected}) {
      auto closure = oracles::closure_reachable(g, mode);
      for (uint32_t u = 0; u < n; ++u)
        for (uint32_t v = 0; v < n; ++v)
          CHECK(reachable(g, NodeRef::mention(u), NodeRef::mention(v), mode) ==
                bool(closure[u][v]));
    }
  }
}

TEST_CASE("minimax of a single edge is its weight") {
  WeightedDigraph g = two_node(0.3);
  CHECK(minimax_dissimilarity(g, NodeRef::mention(0), NodeRef::mention(1),
                              Mode::Directed) == 0.3);
}

TEST_CASE("minimax of a disconnected pair is +inf") {
  WeightedDigraph g;
  g.nodes = dense_nodes(0, 2);
  CHECK(minimax_dissimilarity(g, NodeRef::mention(0), NodeRef::mention(1),
                              Mode::Directed) == kInf);
}

TEST_CASE("minimax prefers the light two-hop path over the heavy direct edge") {
  WeightedDigraph g;
  g.nodes = dense_nodes(0, 3);  // u=0, a=1, v=2
  g.edges = {{NodeRef::mention(0), NodeRef::mention(1), 0.2},
             {NodeRef::mention(1), NodeRef::mention(2), 0.5},
             {NodeRef::mention(0), NodeRef::mention(2), 0.9}};
  CHECK(minimax_dissimilarity(g, NodeRef::mention(0), NodeRef::mention(2),
                              Mode::Directed) == 0.5);
}

TEST_CASE("minimax rejects u == v") {
  WeightedDigraph g = two_node(0.1);
  CHECK_THROWS_AS(minimax_dissimilarity(g, NodeRef::mention(0),
                                        NodeRef::mention(0), Mode::Directed),
                  ContractError);
}

TEST_CASE("minimax agrees exactly with exhaustive simple-path enumeration") {
  std::mt19937 gen(32);
  for (int t = 0; t < 120; ++t) {
    uint32_t n = 2 + gen() % 8;  // up to 9 nodes
    WeightedDigraph g = oracles::random_digraph(gen, n, 0.4);
    for (Mode mode : {Mode::Directed, Mode::Undirected}) {
      for (uint32_t u = 0; u < n; ++u) {
        auto want = oracles::exhaustive_minimax_from(g, u, mode);
        for (uint32_t v = 0; v < n; ++v) {
          if (u == v) continue;
          CHECK(minimax_dissimilarity(g, NodeRef::mention(u),
                                      NodeRef::mention(v), mode) == want[v]);
        }
      }
    }
  }
}

TEST_CASE("a direct edge upper-bounds the minimax dissimilarity") {
  std::mt19937 gen(33);
  for (int t = 0; t < 50; ++t) {
    WeightedDigraph g = oracles::random_digraph(gen, 2 + gen() % 7, 0.5);
    for (const Edge& e : g.edges)
      CHECK(minimax_dissimilarity(g, e.src, e.dst, Mode::Directed) <= e.weight);
  }
}

TEST_CASE("adding an edge never increases any pairwise dissimilarity") {
  std::mt19937 gen(34);
  for (int t = 0; t < 40; ++t) {
    uint32_t n = 3 + gen() % 5;
    WeightedDigraph g = oracles::random_digraph(gen, n, 0.3);
    // pick a missing arc
    std::set<std::pair<uint32_t, uint32_t>> present;
    for (const Edge& e : g.edges) present.insert({e.src.id, e.dst.id});
    uint32_t a = gen() % n, b = gen() % n;
    if (a == b || present.count({a, b})) continue;
    WeightedDigraph bigger = g;
    bigger.edges.push_back({NodeRef::mention(a), NodeRef::mention(b),
                            std::uniform_real_distribution<>(0, 1)(gen)});
    for (uint32_t u = 0; u < n; ++u)
      for (uint32_t v = 0; v < n; ++v) {
        if (u == v) continue;
        NodeRef nu = NodeRef::mention(u), nv = NodeRef::mention(v);
        CHECK(minimax_dissimilarity(bigger, nu, nv, Mode::Directed) <=
              minimax_dissimilarity(g, nu, nv, Mode::Directed));
      }
  }
}

TEST_CASE("undirected minimax is symmetric") {
  std::mt19937 gen(35);
  for (int t = 0; t < 40; ++t) {
    uint32_t n = 2 + gen() % 7;
    WeightedDigraph g = oracles::random_digraph(gen, n, 0.4);
    for (uint32_t u = 0; u < n; ++u)
      for (uint32_t v = u + 1; v < n; ++v) {
        NodeRef nu = NodeRef::mention(u), nv = NodeRef::mention(v);
        CHECK(minimax_dissimilarity(g, nu, nv, Mode::Undirected) ==
              minimax_dissimilarity(g, nv, nu, Mode::Undirected));
      }
  }
}
