#pragma once

// Supra-adjacency and supra-Laplacian assembly for windowed temporal graphs.
//
// Rows are (layer, node) pairs ordered lexicographically. In full mode every
// pair of the universe gets a row; in reduced mode only pairs that are active
// in their layer do, and the temporal coupling (t, v) <-> (t+1, v) exists only
// when both endpoints have rows.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "slpe/common.hpp"
#include "slpe/temporal_graph.hpp"

namespace slpe {

struct SupraIndexMap {
  std::vector<std::pair<int, NodeId>> entries;  // supra row -> (t, node), sorted
  std::vector<std::optional<int>> global_rows;  // per layer, row of its global node

  int size() const { return static_cast<int>(entries.size()); }

  std::optional<int> row_of(int t, NodeId v) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), std::make_pair(t, v));
    if (it == entries.end() || *it != std::make_pair(t, v)) return std::nullopt;
    return static_cast<int>(it - entries.begin());
  }

  bool is_global_row(int row) const {
    const int t = entries[row].first;
    return t < static_cast<int>(global_rows.size()) && global_rows[t] && *global_rows[t] == row;
  }

  friend bool operator==(const SupraIndexMap&, const SupraIndexMap&) = default;
};

enum class MatrixKind { adjacency, laplacian };

inline const char* to_string(MatrixKind k) { return k == MatrixKind::adjacency ? "adjacency" : "laplacian"; }

struct Triplet {
  int row;
  int col;
  double value;
};

/// Symmetric sparse matrix in canonical CSR layout (row-major, ascending columns).
class SupraMatrix {
 public:
  SupraMatrix() = default;

  /// Sums duplicate coordinates; entries that cancel to exactly zero are kept
  /// out of the structure.
  static SupraMatrix from_triplets(int n, std::vector<Triplet> trips, MatrixKind kind, SupraIndexMap map,
                                   double mu) {
    std::sort(trips.begin(), trips.end(),
              [](const Triplet& a, const Triplet& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
    SupraMatrix m;
    m.n_ = n;
    m.kind_ = kind;
    m.map_ = std::move(map);
    m.mu_ = mu;
    m.row_ptr_.assign(n + 1, 0);
    for (std::size_t i = 0; i < trips.size();) {
      const auto& first = trips[i];
      if (first.row < 0 || first.row >= n || first.col < 0 || first.col >= n) throw Error("triplet out of range");
      double v = 0.0;
      std::size_t j = i;
      for (; j < trips.size() && trips[j].row == first.row && trips[j].col == first.col; ++j) v += trips[j].value;
      if (v != 0.0) {
        m.col_.push_back(first.col);
        m.val_.push_back(v);
        ++m.row_ptr_[first.row + 1];
      }
      i = j;
    }
    for (int r = 0; r < n; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
  }

  int rows() const { return n_; }
  int cols() const { return n_; }
  std::size_t nnz() const { return val_.size(); }
  bool empty() const { return n_ == 0; }
  MatrixKind kind() const { return kind_; }
  double mu() const { return mu_; }
  const SupraIndexMap& index_map() const { return map_; }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_; }
  const std::vector<double>& values() const { return val_; }

  double coeff(int r, int c) const {
    auto b = col_.begin() + row_ptr_[r], e = col_.begin() + row_ptr_[r + 1];
    auto it = std::lower_bound(b, e, c);
    return it != e && *it == c ? val_[it - col_.begin()] : 0.0;
  }

  double row_sum(int r) const {
    double s = 0.0;
    for (auto p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) s += val_[p];
    return s;
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (int r = 0; r < n_; ++r)
      for (auto p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) out.push_back({r, col_[p], val_[p]});
    return out;
  }

  /// y = A x for every column of x.
  template <typename Derived>
  Eigen::MatrixXd multiply(const Eigen::MatrixBase<Derived>& x) const {
    Eigen::MatrixXd y(n_, x.cols());
    multiply_into(x, y);
    return y;
  }

  template <typename Derived, typename Out>
  void multiply_into(const Eigen::MatrixBase<Derived>& x, Out&& y) const {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double* xc = &x.derived().coeffRef(0, c);
      double* yc = &y.coeffRef(0, c);
      for (int r = 0; r < n_; ++r) {
        double s = 0.0;
        for (auto p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) s += val_[p] * xc[col_[p]];
        yc[r] = s;
      }
    }
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_, n_);
    for (int r = 0; r < n_; ++r)
      for (auto p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) d(r, col_[p]) = val_[p];
    return d;
  }

  bool is_symmetric() const {
    for (int r = 0; r < n_; ++r)
      for (auto p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
        if (coeff(col_[p], r) != val_[p]) return false;
    return true;
  }

  friend bool operator==(const SupraMatrix& a, const SupraMatrix& b) {
    return a.n_ == b.n_ && a.kind_ == b.kind_ && a.mu_ == b.mu_ && a.row_ptr_ == b.row_ptr_ && a.col_ == b.col_ &&
           a.val_ == b.val_ && a.map_ == b.map_;
  }

 private:
  int n_ = 0;
  MatrixKind kind_ = MatrixKind::adjacency;
  SupraIndexMap map_;
  double mu_ = 0.0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<int> col_;
  std::vector<double> val_;
};

// ---------------------------------------------------------------------------
// Graph modifications

/// Adds, per snapshot, one global node (id = old universe_size + t) linked
/// with unit weight to every active node of that snapshot.
inline TemporalGraph add_global_nodes(const TemporalGraph& g) {
  if (g.snapshots.empty()) throw Error("add_global_nodes: graph has no snapshots");
  if (!g.global_nodes.empty()) throw Error("add_global_nodes: graph already has global nodes");
  TemporalGraph out = g;
  const NodeId base = g.universe_size;
  out.universe_size = base + g.num_snapshots();
  out.global_nodes.clear();
  out.global_base = base;
  for (auto& s : out.snapshots) {
    const NodeId gid = base + s.t;
    std::vector<Edge> edges = s.edges;
    for (NodeId v : s.active_nodes) edges.push_back({v, gid, 1.0});
    const bool allow_loops = std::any_of(s.edges.begin(), s.edges.end(), [](const Edge& e) { return e.u == e.v; });
    s = make_snapshot(s.t, std::move(edges), allow_loops);
    out.global_nodes.emplace_back(gid);
  }
  return out;
}

struct SupraOptions {
  double mu = 1.0;
  bool reduced = true;
  bool use_weights = false;
};

/// Block-diagonal layer adjacencies plus mu couplings between adjacent layers.
/// Self-loops (only present when explicitly allowed at ingestion) are skipped.
inline SupraMatrix build_supra_adjacency(const TemporalGraph& g, const SupraOptions& opt = {}) {
  const int T = g.num_snapshots();
  if (T == 0) throw Error("build_supra_adjacency: graph has no snapshots");
  if (!(opt.mu > 0)) throw Error("build_supra_adjacency: mu must be positive");

  SupraIndexMap map;
  if (opt.reduced) {
    for (const auto& s : g.snapshots)
      for (NodeId v : s.active_nodes) map.entries.emplace_back(s.t, v);
  } else {
    map.entries.reserve(static_cast<std::size_t>(T) * g.universe_size);
    for (int t = 0; t < T; ++t)
      for (NodeId v = 0; v < g.universe_size; ++v) map.entries.emplace_back(t, v);
  }
  map.global_rows.assign(T, std::nullopt);
  if (!g.global_nodes.empty())
    for (int t = 0; t < T; ++t)
      if (g.global_nodes[t]) map.global_rows[t] = map.row_of(t, *g.global_nodes[t]);

  std::vector<Triplet> trips;
  // Row lookups walk each layer's slice of the sorted entry list.
  std::vector<std::size_t> layer_begin(T + 1, 0);
  for (const auto& [t, v] : map.entries) ++layer_begin[t + 1];
  for (int t = 0; t < T; ++t) layer_begin[t + 1] += layer_begin[t];
  auto row = [&](int t, NodeId v) -> std::optional<int> {
    auto b = map.entries.begin() + layer_begin[t], e = map.entries.begin() + layer_begin[t + 1];
    auto it = std::lower_bound(b, e, std::make_pair(t, v));
    if (it == e || it->second != v) return std::nullopt;
    return static_cast<int>(it - map.entries.begin());
  };

  for (const auto& s : g.snapshots) {
    for (const auto& e : s.edges) {
      if (e.u == e.v) continue;
      const double w = opt.use_weights ? e.weight : 1.0;
      const int a = *row(s.t, e.u), b = *row(s.t, e.v);
      trips.push_back({a, b, w});
      trips.push_back({b, a, w});
    }
  }
  for (int t = 0; t + 1 < T; ++t) {
    auto couple = [&](int a, int b) {
      trips.push_back({a, b, opt.mu});
      trips.push_back({b, a, opt.mu});
    };
    for (std::size_t i = layer_begin[t]; i < layer_begin[t + 1]; ++i) {
      const NodeId v = map.entries[i].second;
      if (g.is_global_id(v)) continue;  // global nodes couple through their own chain below
      if (auto nb = row(t + 1, v)) couple(static_cast<int>(i), *nb);
    }
    if (map.global_rows[t] && map.global_rows[t + 1]) couple(*map.global_rows[t], *map.global_rows[t + 1]);
  }
  const int n = map.size();
  return SupraMatrix::from_triplets(n, std::move(trips), MatrixKind::adjacency, std::move(map), opt.mu);
}

/// D - A, with D the row sums of A.
inline SupraMatrix laplacian_from_adjacency(const SupraMatrix& a) {
  if (a.kind() != MatrixKind::adjacency) throw Error("laplacian_from_adjacency: input is not an adjacency matrix");
  std::vector<Triplet> trips;
  trips.reserve(a.nnz() + a.rows());
  for (int r = 0; r < a.rows(); ++r) {
    trips.push_back({r, r, a.row_sum(r)});
    for (auto p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p)
      if (a.col_idx()[p] != r) trips.push_back({r, a.col_idx()[p], -a.values()[p]});
  }
  return SupraMatrix::from_triplets(a.rows(), std::move(trips), MatrixKind::laplacian, a.index_map(), a.mu());
}

inline SupraMatrix build_supra_laplacian(const TemporalGraph& g, const SupraOptions& opt = {}) {
  return laplacian_from_adjacency(build_supra_adjacency(g, opt));
}

/// One single-layer Laplacian per snapshot; index maps keep the snapshot's t.
/// Edgeless layers in reduced mode yield an empty 0x0 matrix.
inline std::vector<SupraMatrix> layer_laplacians(const TemporalGraph& g, const SupraOptions& opt = {}) {
  if (g.snapshots.empty()) throw Error("layer_laplacians: graph has no snapshots");
  std::vector<SupraMatrix> out;
  out.reserve(g.snapshots.size());
  for (int t = 0; t < g.num_snapshots(); ++t) {
    SupraMatrix l = build_supra_laplacian(slice(g, {t, 1}), opt);
    SupraIndexMap map = l.index_map();
    for (auto& e : map.entries) e.first = t;
    std::vector<std::optional<int>> globals(t + 1, std::nullopt);
    globals[t] = map.global_rows.empty() ? std::nullopt : map.global_rows[0];
    map.global_rows = std::move(globals);
    const int n = l.rows();
    out.push_back(SupraMatrix::from_triplets(n, l.triplets(), MatrixKind::laplacian, std::move(map), opt.mu));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text export

inline void write_matrix(std::ostream& out, const SupraMatrix& m) {
  out << "%%supra " << to_string(m.kind()) << ' ' << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << ' '
      << format_real(m.mu()) << '\n';
  for (const auto& t : m.triplets()) out << t.row << ' ' << t.col << ' ' << format_real(t.value) << '\n';
}

inline void write_index_map(std::ostream& out, const SupraIndexMap& map) {
  for (int r = 0; r < map.size(); ++r) out << r << ' ' << map.entries[r].first << ' ' << map.entries[r].second << '\n';
}

/// Inverse of write_matrix / write_index_map (global rows are not serialized).
inline SupraMatrix read_matrix(std::istream& in, std::istream* map_in = nullptr) {
  std::string tag, kind;
  int rows = 0, cols = 0;
  std::size_t nnz = 0;
  double mu = 0;
  if (!(in >> tag >> kind >> rows >> cols >> nnz >> mu) || tag != "%%supra" || rows != cols)
    throw ParseError("bad matrix header", 1);
  std::vector<Triplet> trips(nnz);
  for (std::size_t i = 0; i < nnz; ++i) {
    std::string v;
    if (!(in >> trips[i].row >> trips[i].col >> v)) throw ParseError("truncated triplet list", i + 2);
    trips[i].value = std::strtod(v.c_str(), nullptr);
  }
  SupraIndexMap map;
  if (map_in) {
    int r, t;
    NodeId v;
    while (*map_in >> r >> t >> v) map.entries.emplace_back(t, v);
  }
  return SupraMatrix::from_triplets(rows, std::move(trips),
                                    kind == "laplacian" ? MatrixKind::laplacian : MatrixKind::adjacency,
                                    std::move(map), mu);
}

}  // namespace slpe
