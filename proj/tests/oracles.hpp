#pragma once

// Independent reference implementations used only by the tests. None of these
// call into the library's numerical code.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "slpe/temporal_graph.hpp"

namespace oracle {

using slpe::Edge;
using slpe::NodeId;
using slpe::TemporalGraph;

struct Eig {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Cyclic Jacobi rotations until the off-diagonal mass vanishes; ascending output.
inline Eig jacobi(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (Eigen::Index r = 0; r < n; ++r) {
          const double arp = a(r, p), arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          const double apr = a(p, r), aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          const double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
  }
  std::vector<Eigen::Index> order(n);
  for (Eigen::Index i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) < a(y, y); });
  Eig out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

/// Plain D - A of one snapshot over all `n` universe nodes (unit weights, loops skipped).
inline Eigen::MatrixXd layer_laplacian(const slpe::Snapshot& s, NodeId n, bool weights = false) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : s.edges) {
    if (e.u == e.v) continue;
    const double w = weights ? e.weight : 1.0;
    l(e.u, e.v) -= w;
    l(e.v, e.u) -= w;
    l(e.u, e.u) += w;
    l(e.v, e.v) += w;
  }
  return l;
}

/// The explicit block tridiagonal matrix: L_1 + mu I and L_T + mu I in the
/// corners, L_t + 2 mu I inside, -mu I on the first off-diagonal blocks.
inline Eigen::MatrixXd block_supra_laplacian(const TemporalGraph& g, double mu) {
  const int T = g.num_snapshots();
  const NodeId n = g.universe_size;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(T * n, T * n);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  for (int t = 0; t < T; ++t) {
    const double couplings = T == 1 ? 0 : (t == 0 || t == T - 1) ? 1 : 2;
    m.block(t * n, t * n, n, n) = layer_laplacian(g.snapshots[t], n) + couplings * mu * id;
    if (t + 1 < T) {
      m.block(t * n, (t + 1) * n, n, n) = -mu * id;
      m.block((t + 1) * n, t * n, n, n) = -mu * id;
    }
  }
  return m;
}

/// Full supra-adjacency by direct enumeration of (t, v) pairs.
inline Eigen::MatrixXd full_supra_adjacency(const TemporalGraph& g, double mu) {
  const int T = g.num_snapshots();
  const NodeId n = g.universe_size;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(T * n, T * n);
  for (int t = 0; t < T; ++t) {
    for (const auto& e : g.snapshots[t].edges)
      if (e.u != e.v) a(t * n + e.u, t * n + e.v) = a(t * n + e.v, t * n + e.u) = 1.0;
    if (t + 1 < T)
      for (NodeId v = 0; v < n; ++v) a(t * n + v, (t + 1) * n + v) = a((t + 1) * n + v, t * n + v) = mu;
  }
  return a;
}

/// Random DTDG: every unordered pair is an edge with probability `density`.
inline TemporalGraph random_graph(std::mt19937_64& rng, int n, int T, double density) {
  std::bernoulli_distribution coin(density);
  std::vector<std::vector<Edge>> layers(T);
  for (int t = 0; t < T; ++t)
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (coin(rng)) layers[t].push_back({u, v, 1.0});
  return slpe::make_temporal_graph(layers, n);
}

/// Random DTDG with about `avg_degree` neighbors per node and layer (sparse, for larger n).
inline TemporalGraph random_sparse_graph(std::mt19937_64& rng, int n, int T, double avg_degree) {
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<std::vector<Edge>> layers(T);
  const int m = std::max(1, static_cast<int>(avg_degree * n / 2));
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < m; ++i) {
      const int u = pick(rng), v = pick(rng);
      if (u != v) layers[t].push_back({u, v, 1.0});
    }
  return slpe::make_temporal_graph(layers, n);
}

/// Largest sine of the principal angles between span(a) and span(b).
inline double subspace_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd qa = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() *
                             Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const Eigen::MatrixXd qb = Eigen::HouseholderQR<Eigen::MatrixXd>(b).householderQ() *
                             Eigen::MatrixXd::Identity(b.rows(), b.cols());
  const Eigen::MatrixXd proj = qb - qa * (qa.transpose() * qb);
  return Eigen::JacobiSVD<Eigen::MatrixXd>(proj).singularValues()(0);
}

// ---------------------------------------------------------------------------
// Brute-force color refinement with string signatures and first-seen ids.

struct BruteWl {
  bool supra = true;
  // key (t, v) -> color, for both graphs refined jointly
  std::vector<std::map<std::pair<int, NodeId>, int>> colors;
};

inline std::set<std::pair<int, NodeId>> wl_keys(const TemporalGraph& g, bool supra) {
  std::set<std::pair<int, NodeId>> keys;
  for (const auto& s : g.snapshots) {
    if (supra)
      for (NodeId v = 0; v < g.universe_size; ++v) keys.insert({s.t, v});
    else
      for (const auto& e : s.edges) keys.insert({s.t, e.u}), keys.insert({s.t, e.v});
  }
  return keys;
}

/// One joint round over several graphs. Signatures are strings; ids are given
/// in order of first appearance in a sorted signature list.
inline std::vector<std::map<std::pair<int, NodeId>, int>> brute_round(
    const std::vector<TemporalGraph>& gs, const std::vector<std::map<std::pair<int, NodeId>, int>>& col, bool supra) {
  std::vector<std::map<std::pair<int, NodeId>, std::string>> sig(gs.size());
  std::set<std::string> all;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const auto& g = gs[i];
    for (const auto& [key, c] : col[i]) {
      const auto [t, v] = key;
      std::ostringstream s;
      s << c << '|';
      if (supra) {
        auto p = col[i].find({t - 1, v});
        auto n = col[i].find({t + 1, v});
        s << (p == col[i].end() ? -1 : p->second) << '|' << (n == col[i].end() ? -1 : n->second) << '|';
      }
      // neighbor entries carry the layer index t as well as the color
      std::multiset<int> nb;
      for (const auto& e : g.snapshots[t].edges) {
        if (e.u == v) nb.insert(col[i].at({t, e.v}));
        if (e.v == v && e.u != v) nb.insert(col[i].at({t, e.u}));
      }
      for (int x : nb) s << '(' << x << ':' << t << ')';
      sig[i][key] = s.str();
      all.insert(s.str());
    }
  }
  std::map<std::string, int> id;
  for (const auto& s : all) id.emplace(s, static_cast<int>(id.size()));
  std::vector<std::map<std::pair<int, NodeId>, int>> out(gs.size());
  for (std::size_t i = 0; i < gs.size(); ++i)
    for (const auto& [key, s] : sig[i]) out[i][key] = id.at(s);
  return out;
}

inline int distinct_colors(const std::vector<std::map<std::pair<int, NodeId>, int>>& col) {
  std::set<int> s;
  for (const auto& m : col)
    for (const auto& [k, c] : m) s.insert(c);
  return static_cast<int>(s.size());
}

/// Joint refinement to stability; true when the color multisets (global in
/// supra mode, per layer otherwise) ever differ.
inline bool brute_distinguish(const TemporalGraph& g1, const TemporalGraph& g2, bool supra) {
  std::vector<TemporalGraph> gs{g1, g2};
  std::vector<std::map<std::pair<int, NodeId>, int>> col(2);
  for (int i = 0; i < 2; ++i)
    for (const auto& k : wl_keys(gs[i], supra)) col[i][k] = 0;
  auto differ = [&] {
    if (supra) {
      std::multiset<int> a, b;
      for (const auto& [k, c] : col[0]) a.insert(c);
      for (const auto& [k, c] : col[1]) b.insert(c);
      return a != b;
    }
    std::map<int, std::multiset<int>> a, b;
    for (const auto& [k, c] : col[0]) a[k.first].insert(c);
    for (const auto& [k, c] : col[1]) b[k.first].insert(c);
    return a != b;
  };
  for (int round = 0; round < 1000; ++round) {
    if (differ()) return true;
    const int before = distinct_colors(col);
    col = brute_round(gs, col, supra);
    if (distinct_colors(col) == before) return differ();
  }
  return differ();
}

/// Partition after `rounds` rounds on one graph, as the set of its classes.
inline std::set<std::set<std::pair<int, NodeId>>> brute_partition(const TemporalGraph& g, bool supra, int rounds) {
  std::vector<TemporalGraph> gs{g};
  std::vector<std::map<std::pair<int, NodeId>, int>> col(1);
  for (const auto& k : wl_keys(g, supra)) col[0][k] = 0;
  for (int r = 0; r < rounds; ++r) col = brute_round(gs, col, supra);
  std::map<int, std::set<std::pair<int, NodeId>>> classes;
  for (const auto& [k, c] : col[0]) classes[c].insert(k);
  std::set<std::set<std::pair<int, NodeId>>> out;
  for (auto& [c, s] : classes) out.insert(s);
  return out;
}

}  // namespace oracle
