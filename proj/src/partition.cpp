#include "arblink/partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace arblink {

const char* to_string(EdgeAction a) {
  switch (a) {
    case EdgeAction::ThresholdDrop: return "threshold-drop";
    case EdgeAction::ViolationDrop: return "violation-drop";
    case EdgeAction::RedundantDrop: return "redundant-drop";
    case EdgeAction::Kept: return "kept";
  }
  return "?";
}

std::string PartitionTrace::to_text() const {
  std::string out;
  char buf[64];
  for (const TraceEntry& t : entries) {
    std::snprintf(buf, sizeof(buf), "%.17g", t.edge.weight);
    out += to_string(t.action);
    out += '\t';
    out += to_string(t.edge.src);
    out += '\t';
    out += to_string(t.edge.dst);
    out += '\t';
    out += buf;
    out += '\t';
    out += t.reason;
    out += '\n';
  }
  return out;
}

namespace {

// Connectivity bookkeeping over a shrinking edge set. Components are weak
// (direction-blind) in both modes; only the entity-reachability probe
// differs. Deletions split components via bidirectional search, relabeling
// the smaller side.
class PartitionEngine {
 public:
  PartitionEngine(const WeightedDigraph& g, Mode mode)
      : g_(g), mode_(mode), n_(g.nodes.size()) {
    out_.resize(n_);
    in_.resize(n_);
    alive_.assign(g.edges.size(), 0);
    comp_.assign(n_, -1);
    mark_.assign(n_, 0);
    eu_.reserve(g.edges.size());
    ev_.reserve(g.edges.size());
    for (const Edge& e : g.edges) {
      eu_.push_back(uint32_t(g.node_index(e.src)));
      ev_.push_back(uint32_t(g.node_index(e.dst)));
    }
  }

  void enable_edge(uint32_t ei) {
    alive_[ei] = 1;
    out_[eu_[ei]].push_back(ei);
    in_[ev_[ei]].push_back(ei);
  }

  uint32_t src_index(uint32_t ei) const { return eu_[ei]; }
  uint32_t dst_index(uint32_t ei) const { return ev_[ei]; }

  // Initial components over the enabled edges.
  void build_components() {
    int next = 0;
    std::vector<size_t> stack;
    for (size_t s = 0; s < n_; ++s) {
      if (comp_[s] >= 0) continue;
      int c = next++;
      comp_size_.push_back(0);
      comp_entities_.push_back(0);
      comp_entity_sum_.push_back(0);
      stack.assign(1, s);
      comp_[s] = c;
      while (!stack.empty()) {
        size_t x = stack.back();
        stack.pop_back();
        account(c, x, +1);
        for_each_weak_neighbor(x, kNoEdge, [&](size_t y) {
          if (comp_[y] < 0) {
            comp_[y] = c;
            stack.push_back(y);
          }
        });
      }
    }
  }

  int component_of(size_t x) const { return comp_[x]; }
  int entity_count(int c) const { return comp_entities_[c]; }
  size_t single_entity(int c) const { return size_t(comp_entity_sum_[c]); }

  // Is dst still reachable by the component's entity when edge `skip` is
  // ignored? Directed mode follows edge direction from the entity;
  // Undirected mode asks for plain connectivity.
  bool entity_reaches_without(size_t entity, size_t dst, uint32_t skip) {
    if (entity == dst) return true;
    ++stamp_;
    if (mode_ == Mode::Directed) {
      std::vector<size_t> stack{entity};
      mark_[entity] = stamp_;
      while (!stack.empty()) {
        size_t x = stack.back();
        stack.pop_back();
        for (uint32_t ei : out_[x]) {
          if (!alive_[ei] || ei == skip) continue;
          size_t y = ev_[ei];
          if (y == dst) return true;
          if (mark_[y] != stamp_) {
            mark_[y] = stamp_;
            stack.push_back(y);
          }
        }
      }
      return false;
    }
    bool found = false;
    std::vector<size_t> stack{dst};
    mark_[dst] = stamp_;
    while (!stack.empty() && !found) {
      size_t x = stack.back();
      stack.pop_back();
      for_each_weak_neighbor(x, skip, [&](size_t y) {
        if (y == entity) found = true;
        if (mark_[y] != stamp_) {
          mark_[y] = stamp_;
          stack.push_back(y);
        }
      });
    }
    return found;
  }

  // Permanently remove an enabled edge and split its component if the
  // endpoints fall apart. Bidirectional search; the side that exhausts
  // first is relabeled.
  void remove_edge(uint32_t ei) {
    alive_[ei] = 0;
    size_t u = eu_[ei];
    size_t v = ev_[ei];
    Side a{u, ++stamp_};
    Side b{v, ++stamp_};
    mark_[u] = a.stamp;
    mark_[v] = b.stamp;
    while (true) {
      if (!advance(a, b)) break;   // sides met: still connected
      if (a.done) { relabel(a); return; }
      if (!advance(b, a)) break;
      if (b.done) { relabel(b); return; }
    }
  }

  bool edge_alive(uint32_t ei) const { return alive_[ei] != 0; }

 private:
  static constexpr uint32_t kNoEdge = UINT32_MAX;

  struct Side {
    Side(size_t start, int s) : stamp(s) { frontier.assign(1, start); seen.assign(1, start); }
    std::vector<size_t> frontier;
    std::vector<size_t> seen;
    int stamp;
    size_t cursor = 0;  // next frontier slot to expand
    bool done = false;
  };

  template <class F>
  void for_each_weak_neighbor(size_t x, uint32_t skip, F&& f) {
    for (uint32_t ei : out_[x])
      if (alive_[ei] && ei != skip) f(size_t(ev_[ei]));
    for (uint32_t ei : in_[x])
      if (alive_[ei] && ei != skip) f(size_t(eu_[ei]));
  }

  // Expand one node of `s`; returns false when the searches touch (the
  // component did not split).
  bool advance(Side& s, const Side& other) {
    if (s.cursor >= s.frontier.size()) {
      s.done = true;
      return true;
    }
    size_t x = s.frontier[s.cursor++];
    bool touched = false;
    for_each_weak_neighbor(x, kNoEdge, [&](size_t y) {
      if (mark_[y] == other.stamp) touched = true;
      if (mark_[y] != s.stamp && mark_[y] != other.stamp) {
        mark_[y] = s.stamp;
        s.frontier.push_back(y);
        s.seen.push_back(y);
      }
    });
    return !touched;
  }

  void relabel(const Side& s) {
    int old = comp_[s.seen.front()];
    int nc = int(comp_size_.size());
    comp_size_.push_back(0);
    comp_entities_.push_back(0);
    comp_entity_sum_.push_back(0);
    for (size_t x : s.seen) {
      account(old, x, -1);
      comp_[x] = nc;
      account(nc, x, +1);
    }
  }

  void account(int c, size_t x, int sign) {
    comp_size_[c] += sign;
    if (g_.nodes[x].is_entity()) {
      comp_entities_[c] += sign;
      comp_entity_sum_[c] += sign * int64_t(x);
    }
  }

  const WeightedDigraph& g_;
  Mode mode_;
  size_t n_;
  std::vector<std::vector<uint32_t>> out_, in_;
  std::vector<uint32_t> eu_, ev_;  // dense endpoint indices per edge
  std::vector<char> alive_;
  std::vector<int> comp_;
  std::vector<int64_t> comp_size_, comp_entities_, comp_entity_sum_;
  std::vector<int> mark_;
  int stamp_ = 0;
};

}  // namespace

PartitionResult partition_graph(const WeightedDigraph& g,
                                const PartitionConfig& cfg) {
  for (const Edge& e : g.edges)
    if (e.dst.is_entity())
      throw ContractError("malformed inference graph: entity " +
                          to_string(e.dst) + " has an incoming edge");
  if (std::isnan(cfg.lambda)) throw ConfigError("lambda must not be NaN");

  // Descending weight; ties by ascending (src, dst) node order.
  std::vector<uint32_t> order(g.edges.size());
  for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    const Edge& ea = g.edges[a];
    const Edge& eb = g.edges[b];
    if (ea.weight != eb.weight) return ea.weight > eb.weight;
    if (ea.src != eb.src) return ea.src < eb.src;
    return ea.dst < eb.dst;
  });

  PartitionResult res;
  res.trace.entries.reserve(g.edges.size());
  PartitionEngine engine(g, cfg.mode);

  // Threshold pass: strictly-heavier-than-lambda edges form a prefix of
  // the descending order.
  size_t first_survivor = 0;
  char buf[96];
  while (first_survivor < order.size() &&
         g.edges[order[first_survivor]].weight > cfg.lambda) {
    const Edge& e = g.edges[order[first_survivor]];
    std::snprintf(buf, sizeof(buf), "weight %.17g > lambda %.17g", e.weight,
                  cfg.lambda);
    res.trace.entries.push_back({e, EdgeAction::ThresholdDrop, buf});
    ++first_survivor;
  }
  for (size_t i = first_survivor; i < order.size(); ++i)
    engine.enable_edge(order[i]);
  engine.build_components();

  // Heaviest-first examination of the survivors.
  for (size_t i = first_survivor; i < order.size(); ++i) {
    uint32_t ei = order[i];
    const Edge& e = g.edges[ei];
    size_t v = engine.dst_index(ei);
    int c = engine.component_of(engine.src_index(ei));
    int entities = engine.entity_count(c);
    if (entities >= 2) {
      engine.remove_edge(ei);
      res.trace.entries.push_back(
          {e, EdgeAction::ViolationDrop,
           "component holds " + std::to_string(entities) + " entities"});
    } else if (entities == 1) {
      size_t ent = engine.single_entity(c);
      if (engine.entity_reaches_without(ent, v, ei)) {
        engine.remove_edge(ei);
        res.trace.entries.push_back(
            {e, EdgeAction::RedundantDrop,
             to_string(g.nodes[ent]) + " still reaches " + to_string(e.dst)});
      } else {
        res.trace.entries.push_back(
            {e, EdgeAction::Kept,
             "needed to reach " + to_string(e.dst) + " from " +
                 to_string(g.nodes[ent])});
      }
    } else {
      res.trace.entries.push_back({e, EdgeAction::Kept, "no entity in component"});
    }
  }

  // Outputs: retained edges in input order, components as clusters.
  res.pruned.nodes = g.nodes;
  for (uint32_t ei = 0; ei < g.edges.size(); ++ei)
    if (engine.edge_alive(ei)) res.pruned.edges.push_back(g.edges[ei]);

  std::vector<std::vector<NodeRef>> by_comp;
  std::vector<int> comp_slot;
  for (size_t x = 0; x < g.nodes.size(); ++x) {
    int c = engine.component_of(x);
    if (c >= int(comp_slot.size())) comp_slot.resize(c + 1, -1);
    if (comp_slot[c] < 0) {
      comp_slot[c] = int(by_comp.size());
      by_comp.emplace_back();
    }
    by_comp[comp_slot[c]].push_back(g.nodes[x]);
  }
  // Nodes were scanned in ascending order, so members are sorted and the
  // cluster list is ordered by its first member.
  res.clusters.clusters = std::move(by_comp);
  return res;
}

LinkResult link_decisions(const Clustering& clusters) {
  LinkResult out;
  for (const auto& cluster : clusters.clusters) {
    std::optional<uint32_t> entity;
    for (NodeRef n : cluster) {
      if (n.is_entity()) {
        if (entity)
          throw ContractError("cluster holds two entities: e:" +
                              std::to_string(*entity) + " and " + to_string(n));
        entity = n.id;
      }
    }
    for (NodeRef n : cluster)
      if (n.is_mention()) out.assignments.push_back({n.id, entity});
  }
  std::sort(out.assignments.begin(), out.assignments.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

std::vector<std::vector<NodeRef>> discovered_clusters(
    const Clustering& clusters) {
  std::vector<std::vector<NodeRef>> out;
  for (const auto& cluster : clusters.clusters) {
    bool has_entity = false;
    for (NodeRef n : cluster) has_entity |= n.is_entity();
    if (!has_entity) out.push_back(cluster);
  }
  return out;
}

}  // namespace arblink
