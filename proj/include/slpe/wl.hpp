#pragma once

// Color refinement on discrete-time dynamic graphs. Supra mode refines (node, t)
// pairs using in-layer neighbors plus the same node's colors at t-1 and t+1;
// layer mode runs plain 1-WL on every snapshot.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "slpe/common.hpp"
#include "slpe/temporal_graph.hpp"

namespace slpe {

enum class WlMode { supra, layer };
enum class InitialColoring { constant, from_features };

inline WlMode parse_wl_mode(const std::string& s) {
  if (s == "supra") return WlMode::supra;
  if (s == "layer") return WlMode::layer;
  throw Error("unknown WL mode '" + s + "'");
}

inline const char* to_string(WlMode m) { return m == WlMode::supra ? "supra" : "layer"; }

using WlKey = std::pair<NodeId, int>;  // (node, t)

struct WlConfig {
  WlMode mode = WlMode::supra;
  int max_rounds = 64;
  InitialColoring initial_coloring = InitialColoring::constant;
  std::map<WlKey, std::int64_t> features;  // initial labels for from_features; absent keys get 0
  bool reduced = false;       // supra mode: color only active (node, t) pairs
  bool edge_labels = false;   // use edge weights as edge labels (unit label otherwise)
  std::int64_t boundary_color = -1;  // temporal neighbor outside the window (or absent)

  void validate() const {
    if (max_rounds < 1) throw Error("wl: max_rounds must be at least 1");
  }
};

struct ColorPartition {
  std::map<WlKey, int> colors;
  int round = 0;        // refinement rounds performed
  bool stable = false;  // the last round split no class
  int num_colors = 0;
  std::vector<int> fingerprint;                      // sorted multiset of all colors
  std::vector<std::vector<int>> layer_fingerprints;  // sorted multiset per snapshot
};

namespace detail {

struct WlGraph {
  int T = 0;
  std::vector<WlKey> keys;
  std::vector<std::vector<std::pair<int, std::int64_t>>> nbrs;  // (key index, edge label)
  std::vector<int> prev, next;  // key index of the same node at t-1 / t+1, or -1
};

inline WlGraph wl_graph(const TemporalGraph& g, WlMode mode, bool reduced, bool edge_labels) {
  WlGraph w;
  w.T = g.num_snapshots();
  std::map<WlKey, int> index;
  // Keys sorted by (t, node) so indices are deterministic.
  std::vector<std::pair<int, NodeId>> order;
  if (mode == WlMode::supra && !reduced) {
    for (int t = 0; t < w.T; ++t)
      for (NodeId v = 0; v < g.universe_size; ++v) order.emplace_back(t, v);
  } else {
    for (const auto& s : g.snapshots)
      for (NodeId v : s.active_nodes) order.emplace_back(s.t, v);
  }
  for (const auto& [t, v] : order) {
    index[{v, t}] = static_cast<int>(w.keys.size());
    w.keys.emplace_back(v, t);
  }
  w.nbrs.resize(w.keys.size());
  w.prev.assign(w.keys.size(), -1);
  w.next.assign(w.keys.size(), -1);
  for (const auto& s : g.snapshots)
    for (const auto& e : s.edges) {
      const std::int64_t label = edge_labels ? std::bit_cast<std::int64_t>(e.weight) : 1;
      const int a = index.at({e.u, s.t}), b = index.at({e.v, s.t});
      w.nbrs[a].emplace_back(b, label);
      if (a != b) w.nbrs[b].emplace_back(a, label);
    }
  if (mode == WlMode::supra)
    for (std::size_t i = 0; i < w.keys.size(); ++i) {
      const auto [v, t] = w.keys[i];
      if (auto it = index.find({v, t - 1}); it != index.end()) w.prev[i] = it->second;
      if (auto it = index.find({v, t + 1}); it != index.end()) w.next[i] = it->second;
    }
  return w;
}

using WlTuple = std::vector<std::int64_t>;

inline WlTuple wl_tuple(const WlGraph& w, const std::vector<int>& colors, std::size_t i, WlMode mode,
                        std::int64_t boundary) {
  WlTuple tup{colors[i]};
  if (mode == WlMode::supra) {
    tup.push_back(w.prev[i] < 0 ? boundary : colors[w.prev[i]]);
    tup.push_back(w.next[i] < 0 ? boundary : colors[w.next[i]]);
  }
  std::vector<std::array<std::int64_t, 3>> ms;
  ms.reserve(w.nbrs[i].size());
  for (const auto& [j, label] : w.nbrs[i]) ms.push_back({colors[j], label, w.keys[i].second});
  std::sort(ms.begin(), ms.end());
  tup.push_back(static_cast<std::int64_t>(ms.size()));
  for (const auto& m : ms) tup.insert(tup.end(), m.begin(), m.end());
  return tup;
}

/// Assigns every tuple the rank of its value among the distinct tuples of all
/// graphs together, so ids are dense and independent of node labels. The
/// sorted distinct list doubles as the reverse map; it is checked on the way out.
inline std::vector<std::vector<int>> intern_tuples(const std::vector<std::vector<WlTuple>>& tuples,
                                                   std::vector<WlTuple>* reverse = nullptr) {
  std::vector<WlTuple> distinct;
  for (const auto& per_graph : tuples) distinct.insert(distinct.end(), per_graph.begin(), per_graph.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<std::vector<int>> out(tuples.size());
  for (std::size_t g = 0; g < tuples.size(); ++g) {
    out[g].reserve(tuples[g].size());
    for (const auto& tup : tuples[g]) {
      const auto it = std::lower_bound(distinct.begin(), distinct.end(), tup);
      const int id = static_cast<int>(it - distinct.begin());
      if (distinct[id] != tup) throw Error("wl: color interning is not injective");
      out[g].push_back(id);
    }
  }
  if (reverse) *reverse = std::move(distinct);
  return out;
}

inline int count_distinct(std::vector<int> c) {
  std::sort(c.begin(), c.end());
  return static_cast<int>(std::unique(c.begin(), c.end()) - c.begin());
}

inline std::vector<WlTuple> initial_tuples(const WlGraph& w, const WlConfig& cfg) {
  std::vector<WlTuple> out;
  for (const auto& key : w.keys) {
    std::int64_t c = 0;
    if (cfg.initial_coloring == InitialColoring::from_features)
      if (auto it = cfg.features.find(key); it != cfg.features.end()) c = it->second;
    out.push_back({c});
  }
  return out;
}

inline ColorPartition make_partition(const WlGraph& w, const std::vector<int>& colors, int round, bool stable) {
  ColorPartition p;
  p.round = round;
  p.stable = stable;
  p.layer_fingerprints.resize(w.T);
  for (std::size_t i = 0; i < w.keys.size(); ++i) {
    p.colors[w.keys[i]] = colors[i];
    p.layer_fingerprints[w.keys[i].second].push_back(colors[i]);
  }
  p.fingerprint = colors;
  std::sort(p.fingerprint.begin(), p.fingerprint.end());
  for (auto& lf : p.layer_fingerprints) std::sort(lf.begin(), lf.end());
  p.num_colors = count_distinct(colors);
  return p;
}

/// Lockstep refinement of several graphs with one shared interning per round.
struct WlRun {
  WlConfig cfg;
  std::vector<WlGraph> graphs;
  std::vector<std::vector<int>> colors;
  int round = 0;

  WlRun(const std::vector<const TemporalGraph*>& gs, const WlConfig& c) : cfg(c) {
    cfg.validate();
    std::vector<std::vector<WlTuple>> init;
    for (const auto* g : gs) {
      graphs.push_back(wl_graph(*g, cfg.mode, cfg.reduced, cfg.edge_labels));
      init.push_back(initial_tuples(graphs.back(), cfg));
    }
    colors = intern_tuples(init);
  }

  int joint_classes() const {
    std::vector<int> all;
    for (const auto& c : colors) all.insert(all.end(), c.begin(), c.end());
    return count_distinct(all);
  }

  /// One round; returns true when no class was split.
  bool step() {
    const int before = joint_classes();
    std::vector<std::vector<WlTuple>> tuples(graphs.size());
    for (std::size_t g = 0; g < graphs.size(); ++g)
      for (std::size_t i = 0; i < graphs[g].keys.size(); ++i)
        tuples[g].push_back(wl_tuple(graphs[g], colors[g], i, cfg.mode, cfg.boundary_color));
    colors = intern_tuples(tuples);
    ++round;
    return joint_classes() == before;
  }

  ColorPartition partition(std::size_t g, bool stable) const { return make_partition(graphs[g], colors[g], round, stable); }
};

}  // namespace detail

/// Refines until a round splits no class, or max_rounds.
inline ColorPartition refine(const TemporalGraph& g, const WlConfig& cfg) {
  if (g.snapshots.empty()) throw Error("wl: graph has no snapshots");
  detail::WlRun run({&g}, cfg);
  bool stable = false;
  while (!stable && run.round < cfg.max_rounds) stable = run.step();
  return run.partition(0, stable);
}

/// Exactly `rounds` refinement rounds (0 = the initial coloring).
inline ColorPartition refine_rounds(const TemporalGraph& g, const WlConfig& cfg, int rounds) {
  if (g.snapshots.empty()) throw Error("wl: graph has no snapshots");
  detail::WlRun run({&g}, cfg);
  bool stable = false;
  for (int r = 0; r < rounds; ++r) stable = run.step();
  return run.partition(0, stable);
}

struct WlRound {
  int round = 0;
  int classes_g1 = 0, classes_g2 = 0;
  bool fingerprints_equal = true;
};

struct Distinction {
  bool distinguished = false;
  int round = 0;  // round at which fingerprints diverged, or the stabilization round
  std::string reason;
  std::vector<WlRound> transcript;
};

/// Runs both graphs in lockstep with shared color ids. Supra mode compares the
/// global color multisets; layer mode compares them snapshot by snapshot.
inline Distinction distinguish(const TemporalGraph& g1, const TemporalGraph& g2, const WlConfig& cfg) {
  Distinction d;
  if (g1.num_snapshots() != g2.num_snapshots()) {
    d.distinguished = true;
    d.reason = "different number of snapshots";
    return d;
  }
  if (g1.snapshots.empty()) throw Error("wl: graph has no snapshots");
  detail::WlRun run({&g1, &g2}, cfg);
  bool stable = false;
  for (;;) {
    const ColorPartition p1 = run.partition(0, stable), p2 = run.partition(1, stable);
    const bool equal = cfg.mode == WlMode::supra ? p1.fingerprint == p2.fingerprint
                                                 : p1.layer_fingerprints == p2.layer_fingerprints;
    d.transcript.push_back({run.round, p1.num_colors, p2.num_colors, equal});
    d.round = run.round;
    if (!equal) {
      d.distinguished = true;
      d.reason = "color multisets differ";
      return d;
    }
    if (stable) {
      d.reason = "stable with equal color multisets";
      return d;
    }
    if (run.round >= cfg.max_rounds) {
      d.reason = "round limit reached with equal color multisets";
      return d;
    }
    stable = run.step();
  }
}

/// A pair of non-isomorphic DTDGs whose snapshots are pairwise isomorphic:
/// the same edge persists in one graph and moves to fresh nodes in the other.
inline std::pair<TemporalGraph, TemporalGraph> generate_counterexample() {
  using Layers = std::vector<std::vector<Edge>>;
  TemporalGraph g1 = make_temporal_graph(Layers{{Edge{0, 1, 1.0}}, {Edge{0, 1, 1.0}}}, 4);
  TemporalGraph g2 = make_temporal_graph(Layers{{Edge{0, 1, 1.0}}, {Edge{2, 3, 1.0}}}, 4);
  g1.name = "counterexample-persistent";
  g2.name = "counterexample-moved";
  return {std::move(g1), std::move(g2)};
}

struct RefinementReport {
  int rounds = 0;
  std::size_t keys_checked = 0;
  std::size_t violations = 0;  // pairs with equal supra colors but different layer colors
  std::vector<std::pair<WlKey, WlKey>> examples;  // up to 10 violating pairs
};

/// Checks, over the (node, t) keys both modes color, that equal supra colors
/// imply equal layer colors after the same number of rounds.
inline RefinementReport refinement_check(const TemporalGraph& g, int rounds, const WlConfig& base = {}) {
  WlConfig sc = base, lc = base;
  sc.mode = WlMode::supra;
  lc.mode = WlMode::layer;
  const ColorPartition sp = refine_rounds(g, sc, rounds), lp = refine_rounds(g, lc, rounds);
  RefinementReport rep;
  rep.rounds = rounds;
  std::map<int, std::vector<std::pair<int, WlKey>>> by_supra;  // supra color -> (layer color, key)
  for (const auto& [key, lcolor] : lp.colors) {
    auto it = sp.colors.find(key);
    if (it == sp.colors.end()) continue;
    ++rep.keys_checked;
    by_supra[it->second].emplace_back(lcolor, key);
  }
  for (auto& [sc_id, members] : by_supra) {
    std::sort(members.begin(), members.end());
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j)
        if (members[i].first != members[j].first) {
          ++rep.violations;
          if (rep.examples.size() < 10) rep.examples.emplace_back(members[i].second, members[j].second);
        }
  }
  return rep;
}

}  // namespace slpe
