#pragma once

// Snapshot-based dynamic graphs: data model, ingestion from timestamped
// edge lists, windowing and chronological splitting.

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "slpe/common.hpp"

namespace slpe {

struct Edge {
  NodeId u = 0;  // u <= v after canonicalization
  NodeId v = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Snapshot {
  int t = 0;
  std::vector<Edge> edges;           // sorted by (u, v), each unordered pair once
  std::vector<NodeId> active_nodes;  // sorted union of edge endpoints

  bool is_active(NodeId v) const {
    return std::binary_search(active_nodes.begin(), active_nodes.end(), v);
  }

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

/// Canonicalizes a raw edge list into a snapshot: orders endpoints, merges
/// duplicate unordered pairs by summing weights and recomputes the active set.
inline Snapshot make_snapshot(int t, std::vector<Edge> edges, bool allow_self_loops = false) {
  for (auto& e : edges) {
    if (e.u < 0 || e.v < 0) throw Error("negative node id in snapshot " + std::to_string(t));
    if (e.u == e.v && !allow_self_loops)
      throw Error("self-loop on node " + std::to_string(e.u) + " in snapshot " + std::to_string(t));
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
  Snapshot s;
  s.t = t;
  for (const auto& e : edges) {
    if (!s.edges.empty() && s.edges.back().u == e.u && s.edges.back().v == e.v) {
      s.edges.back().weight += e.weight;
    } else {
      s.edges.push_back(e);
    }
  }
  for (const auto& e : s.edges) {
    s.active_nodes.push_back(e.u);
    s.active_nodes.push_back(e.v);
  }
  std::sort(s.active_nodes.begin(), s.active_nodes.end());
  s.active_nodes.erase(std::unique(s.active_nodes.begin(), s.active_nodes.end()), s.active_nodes.end());
  return s;
}

struct Window {
  int start = 0;
  int length = 1;
};

struct TemporalGraph {
  std::vector<Snapshot> snapshots;
  NodeId universe_size = 0;
  std::string name;
  std::string source;
  // Per-snapshot id of the auxiliary global node, set by add_global_nodes.
  std::vector<std::optional<NodeId>> global_nodes;
  // ids >= global_base are global nodes (-1 when none were added).
  NodeId global_base = -1;
  // dense id -> id as it appeared in the input file (empty when ids were kept).
  std::vector<NodeId> original_ids;
  // representative raw timestamp of every snapshot (lower bucket bound for fixed partitions).
  std::vector<double> timestamps;

  int num_snapshots() const { return static_cast<int>(snapshots.size()); }

  bool is_global(int t, NodeId v) const {
    return !global_nodes.empty() && global_nodes[t] && *global_nodes[t] == v;
  }

  bool is_global_id(NodeId v) const { return global_base >= 0 && v >= global_base; }

  /// Throws if any structural invariant is broken.
  void validate() const {
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
      const auto& s = snapshots[i];
      if (s.t != static_cast<int>(i)) throw Error("snapshots must be indexed 0..T-1 without gaps");
      std::vector<NodeId> endpoints;
      for (std::size_t j = 0; j < s.edges.size(); ++j) {
        const auto& e = s.edges[j];
        if (e.u > e.v) throw Error("edge endpoints not canonical");
        if (e.v >= universe_size) throw Error("node id outside the universe");
        if (j > 0 && std::tie(s.edges[j - 1].u, s.edges[j - 1].v) >= std::tie(e.u, e.v))
          throw Error("edge list not sorted or contains a duplicate pair");
        endpoints.push_back(e.u);
        endpoints.push_back(e.v);
      }
      std::sort(endpoints.begin(), endpoints.end());
      endpoints.erase(std::unique(endpoints.begin(), endpoints.end()), endpoints.end());
      if (endpoints != s.active_nodes) throw Error("active_nodes differs from the edge endpoints");
    }
    if (!global_nodes.empty() && global_nodes.size() != snapshots.size())
      throw Error("global node table has the wrong length");
  }

  /// Identity on snapshots and universe; metadata is ignored.
  bool same_structure(const TemporalGraph& o) const {
    return universe_size == o.universe_size && snapshots == o.snapshots && global_nodes == o.global_nodes &&
           global_base == o.global_base;
  }
};

/// Builds a graph from per-snapshot raw edge lists; universe_size defaults
/// to max id + 1.
inline TemporalGraph make_temporal_graph(const std::vector<std::vector<Edge>>& layers,
                                         std::optional<NodeId> universe_size = std::nullopt,
                                         bool allow_self_loops = false) {
  TemporalGraph g;
  NodeId max_id = -1;
  for (std::size_t t = 0; t < layers.size(); ++t) {
    g.snapshots.push_back(make_snapshot(static_cast<int>(t), layers[t], allow_self_loops));
    if (!g.snapshots.back().active_nodes.empty())
      max_id = std::max(max_id, g.snapshots.back().active_nodes.back());
  }
  g.universe_size = universe_size ? *universe_size : max_id + 1;
  if (g.universe_size <= max_id) throw Error("universe_size smaller than the largest node id");
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// Ingestion

struct Partition {
  enum class Kind { distinct, fixed } kind = Kind::distinct;
  int buckets = 0;

  static Partition parse(std::string_view text) {
    if (text == "distinct") return {};
    if (text.substr(0, 6) == "fixed:") {
      int n = 0;
      auto rest = text.substr(6);
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), n);
      if (ec == std::errc() && ptr == rest.data() + rest.size() && n >= 1) return {Kind::fixed, n};
    }
    throw Error("invalid partition '" + std::string(text) + "', expected distinct or fixed:N");
  }
};

struct IngestOptions {
  Partition partition;
  bool allow_self_loops = false;
};

namespace detail {

inline bool parse_int(std::string_view s, NodeId& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline bool parse_real(std::string_view s, double& out) {
  std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size() && !tmp.empty() && std::isfinite(out);
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_sep = [](char c) { return c == ' ' || c == '\t' || c == ',' || c == '\r'; };
  while (i < line.size()) {
    while (i < line.size() && is_sep(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_sep(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

struct Record {
  NodeId src, dst;
  double ts;
  double weight;
};

// "# temporal-graph universe_size=N snapshots=T" written by write_edge_list.
inline bool parse_header_pragma(std::string_view line, NodeId& universe, NodeId& snapshots) {
  constexpr std::string_view tag = "# temporal-graph";
  if (line.substr(0, tag.size()) != tag) return false;
  bool have_u = false, have_t = false;
  for (auto f : split_fields(line.substr(tag.size()))) {
    if (f.substr(0, 14) == "universe_size=") have_u = parse_int(f.substr(14), universe);
    if (f.substr(0, 10) == "snapshots=") have_t = parse_int(f.substr(10), snapshots);
  }
  return have_u && have_t;
}

}  // namespace detail

/// Reads `src dst timestamp [weight]` records and buckets them into snapshots.
///
/// Node ids are remapped to a dense, order-preserving range unless the file
/// carries the canonical header written by write_edge_list, in which case ids
/// and snapshot indices are taken verbatim.
inline TemporalGraph ingest_edge_list(std::istream& in, const IngestOptions& opts = {},
                                      std::string source = {}) {
  std::vector<detail::Record> records;
  std::vector<std::size_t> record_line;
  std::string line;
  std::size_t lineno = 0;
  NodeId pragma_universe = -1, pragma_snapshots = -1;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv(line);
    auto first = sv.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    if (sv[first] == '#') {
      if (records.empty()) detail::parse_header_pragma(sv.substr(first), pragma_universe, pragma_snapshots);
      continue;
    }
    auto f = detail::split_fields(sv);
    if (f.size() != 3 && f.size() != 4)
      throw ParseError("expected 'src dst timestamp [weight]', got " + std::to_string(f.size()) + " fields", lineno);
    detail::Record r{};
    if (!detail::parse_int(f[0], r.src) || !detail::parse_int(f[1], r.dst))
      throw ParseError("node id is not an integer", lineno);
    if (r.src < 0 || r.dst < 0) throw ParseError("negative node id", lineno);
    if (!detail::parse_real(f[2], r.ts)) throw ParseError("timestamp is not a number", lineno);
    r.weight = 1.0;
    if (f.size() == 4 && !detail::parse_real(f[3], r.weight)) throw ParseError("weight is not a number", lineno);
    if (r.src == r.dst && !opts.allow_self_loops) throw ParseError("self-loop rejected", lineno);
    records.push_back(r);
    record_line.push_back(lineno);
  }
  if (records.empty()) throw ParseError("empty file", 0);

  TemporalGraph g;
  g.source = std::move(source);
  const bool canonical = pragma_universe >= 0;

  // node ids
  if (canonical) {
    g.universe_size = pragma_universe;
    for (std::size_t i = 0; i < records.size(); ++i)
      if (records[i].src >= pragma_universe || records[i].dst >= pragma_universe)
        throw ParseError("node id exceeds declared universe_size", record_line[i]);
  } else {
    std::vector<NodeId> ids;
    ids.reserve(records.size() * 2);
    for (const auto& r : records) {
      ids.push_back(r.src);
      ids.push_back(r.dst);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    const bool already_dense = ids.back() + 1 == static_cast<NodeId>(ids.size());
    if (!already_dense) {
      for (auto& r : records) {
        r.src = std::lower_bound(ids.begin(), ids.end(), r.src) - ids.begin();
        r.dst = std::lower_bound(ids.begin(), ids.end(), r.dst) - ids.begin();
      }
      g.original_ids = ids;
    }
    g.universe_size = static_cast<NodeId>(ids.size());
  }

  // snapshot assignment
  std::vector<int> bucket(records.size());
  int num_snapshots = 0;
  if (canonical) {
    num_snapshots = static_cast<int>(pragma_snapshots);
    for (std::size_t i = 0; i < records.size(); ++i) {
      double ts = records[i].ts;
      if (ts != std::floor(ts) || ts < 0 || ts >= pragma_snapshots)
        throw ParseError("timestamp outside declared snapshot range", record_line[i]);
      bucket[i] = static_cast<int>(ts);
    }
    for (int t = 0; t < num_snapshots; ++t) g.timestamps.push_back(t);
  } else if (opts.partition.kind == Partition::Kind::distinct) {
    std::vector<double> ts;
    for (const auto& r : records) ts.push_back(r.ts);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    for (std::size_t i = 0; i < records.size(); ++i)
      bucket[i] = static_cast<int>(std::lower_bound(ts.begin(), ts.end(), records[i].ts) - ts.begin());
    num_snapshots = static_cast<int>(ts.size());
    g.timestamps = ts;
  } else {
    auto [lo, hi] = std::minmax_element(records.begin(), records.end(),
                                        [](const auto& a, const auto& b) { return a.ts < b.ts; });
    const double tmin = lo->ts, range = hi->ts - lo->ts;
    num_snapshots = opts.partition.buckets;
    for (std::size_t i = 0; i < records.size(); ++i) {
      int b = range > 0 ? static_cast<int>(std::floor((records[i].ts - tmin) / range * num_snapshots)) : 0;
      bucket[i] = std::clamp(b, 0, num_snapshots - 1);
    }
    for (int t = 0; t < num_snapshots; ++t) g.timestamps.push_back(tmin + range * t / num_snapshots);
  }

  std::vector<std::vector<Edge>> layers(num_snapshots);
  bool reversed_seen = false;
  {
    std::vector<std::map<std::pair<NodeId, NodeId>, bool>> directions(num_snapshots);
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      layers[bucket[i]].push_back({r.src, r.dst, r.weight});
      if (r.src != r.dst) {
        auto key = std::minmax(r.src, r.dst);
        auto [it, inserted] = directions[bucket[i]].try_emplace({key.first, key.second}, r.src < r.dst);
        if (!inserted && it->second != (r.src < r.dst)) reversed_seen = true;
      }
    }
  }
  if (reversed_seen) log_warning("directed input detected; edges symmetrized and weights summed");

  for (int t = 0; t < num_snapshots; ++t)
    g.snapshots.push_back(make_snapshot(t, std::move(layers[t]), opts.allow_self_loops));
  g.validate();
  return g;
}

inline TemporalGraph ingest_edge_list(const std::string& path, const IngestOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open edge list '" + path + "'");
  auto g = ingest_edge_list(in, opts, path);
  auto slash = path.find_last_of('/');
  g.name = slash == std::string::npos ? path : path.substr(slash + 1);
  return g;
}

/// Canonical edge-list form: header pragma, then `u v t weight` sorted by (t, u, v).
inline void write_edge_list(std::ostream& out, const TemporalGraph& g) {
  out << "# temporal-graph universe_size=" << g.universe_size << " snapshots=" << g.num_snapshots() << "\n";
  for (const auto& s : g.snapshots)
    for (const auto& e : s.edges) out << e.u << ' ' << e.v << ' ' << s.t << ' ' << format_real(e.weight) << '\n';
}

// ---------------------------------------------------------------------------
// Windowing and splits

inline TemporalGraph slice(const TemporalGraph& g, const Window& w) {
  if (w.length < 1 || w.start < 0 || w.start + w.length > g.num_snapshots())
    throw Error("window [" + std::to_string(w.start) + ", " + std::to_string(w.start + w.length) +
                ") out of range for " + std::to_string(g.num_snapshots()) + " snapshots");
  TemporalGraph out;
  out.universe_size = g.universe_size;
  out.name = g.name;
  out.source = g.source;
  out.original_ids = g.original_ids;
  out.global_base = g.global_base;
  for (int i = 0; i < w.length; ++i) {
    out.snapshots.push_back(g.snapshots[w.start + i]);
    out.snapshots.back().t = i;
    if (!g.global_nodes.empty()) out.global_nodes.push_back(g.global_nodes[w.start + i]);
    if (!g.timestamps.empty()) out.timestamps.push_back(g.timestamps[w.start + i]);
  }
  return out;
}

/// The `length` most recent snapshots (clamped to the whole graph).
inline Window last_window(const TemporalGraph& g, int length) {
  length = std::clamp(length, 1, std::max(1, g.num_snapshots()));
  return {g.num_snapshots() - length, length};
}

struct Split {
  TemporalGraph train, validation, test;
};

inline Split chronological_split(const TemporalGraph& g, double train_frac, double val_frac) {
  if (!(train_frac > 0 && train_frac < 1 && val_frac > 0 && val_frac < 1 && train_frac + val_frac < 1))
    throw Error("split fractions must lie in (0, 1) and sum to less than 1");
  const int T = g.num_snapshots();
  // small epsilon keeps exact products such as 10 * 0.7 from flooring to 6
  const int b1 = static_cast<int>(std::floor(T * train_frac + 1e-9));
  const int b2 = static_cast<int>(std::floor(T * (train_frac + val_frac) + 1e-9));
  if (b1 <= 0) throw Error("empty training segment");
  if (b2 <= b1) throw Error("empty validation segment");
  if (b2 >= T) throw Error("empty test segment");
  return {slice(g, {0, b1}), slice(g, {b1, b2 - b1}), slice(g, {b2, T - b2})};
}

}  // namespace slpe
