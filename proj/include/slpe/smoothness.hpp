#pragma once

// The temporal smoothness objective: per-layer Laplacian quadratic forms plus
// mu-weighted squared differences between adjacent layers' embeddings, and its
// agreement with the supra-Laplacian quadratic form.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <vector>

#include "slpe/common.hpp"
#include "slpe/eigensolve.hpp"
#include "slpe/supra.hpp"
#include "slpe/temporal_graph.hpp"

namespace slpe {

struct SmoothnessReport {
  std::vector<double> intra;  // tr(X_t' L_t X_t) per layer
  std::vector<double> inter;  // mu * ||X_t - X_{t-1}||_F^2 per transition
  double total = 0;
  double quad_form = 0;  // tr(X' L X) with the full supra-Laplacian
  double identity_gap = 0;

  double intra_sum() const { return std::accumulate(intra.begin(), intra.end(), 0.0); }
  double inter_sum() const { return std::accumulate(inter.begin(), inter.end(), 0.0); }
};

/// Stacks per-layer blocks in supra row order (layer-major).
inline Eigen::MatrixXd stack_blocks(const std::vector<Eigen::MatrixXd>& blocks) {
  if (blocks.empty()) return {};
  Eigen::Index rows = 0;
  for (const auto& b : blocks) rows += b.rows();
  Eigen::MatrixXd x(rows, blocks.front().cols());
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    x.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return x;
}

inline std::vector<Eigen::MatrixXd> split_blocks(const Eigen::MatrixXd& x, int layers) {
  if (layers < 1 || x.rows() % layers) throw Error("split_blocks: rows not divisible by the layer count");
  const Eigen::Index n = x.rows() / layers;
  std::vector<Eigen::MatrixXd> out;
  for (int t = 0; t < layers; ++t) out.push_back(x.middleRows(t * n, n));
  return out;
}

inline double quadratic_trace(const SupraMatrix& l, const Eigen::MatrixXd& x) {
  return (x.array() * l.multiply(x).array()).sum();
}

/// Objective for per-layer Laplacians over a common node set. `supra` is the
/// full supra-Laplacian of the same layers, used for the quadratic form.
inline SmoothnessReport evaluate_objective(const std::vector<SupraMatrix>& layers, const SupraMatrix& supra,
                                           const std::vector<Eigen::MatrixXd>& blocks, double mu) {
  if (layers.empty() || blocks.size() != layers.size()) throw Error("smoothness: one block per layer required");
  const Eigen::Index k = blocks.front().cols();
  Eigen::Index rows = 0;
  for (std::size_t t = 0; t < layers.size(); ++t) {
    if (blocks[t].cols() != k) throw Error("smoothness: blocks differ in column count");
    if (blocks[t].rows() != layers[t].rows() || blocks[t].rows() != blocks.front().rows())
      throw Error("smoothness: block rows do not match the common node set");
    rows += blocks[t].rows();
  }
  if (supra.rows() != rows) throw Error("smoothness: supra-Laplacian size does not match the blocks");

  SmoothnessReport rep;
  for (std::size_t t = 0; t < layers.size(); ++t) rep.intra.push_back(quadratic_trace(layers[t], blocks[t]));
  for (std::size_t t = 1; t < layers.size(); ++t) rep.inter.push_back(mu * (blocks[t] - blocks[t - 1]).squaredNorm());
  rep.total = rep.intra_sum() + rep.inter_sum();
  rep.quad_form = quadratic_trace(supra, stack_blocks(blocks));
  rep.identity_gap = std::abs(rep.total - rep.quad_form);
  return rep;
}

/// Same, building the full per-layer and supra-Laplacians from the graph.
inline SmoothnessReport evaluate_objective(const TemporalGraph& g, const std::vector<Eigen::MatrixXd>& blocks,
                                           double mu) {
  const SupraOptions full{mu, false, false};
  return evaluate_objective(layer_laplacians(g, full), build_supra_laplacian(g, full), blocks, mu);
}

struct MinimalityReport {
  int trials = 0;
  double optimum = 0;  // tr(V' L V) for the k lowest eigenvectors
  std::vector<double> objectives;
  int violations = 0;  // trials below optimum - 1e-9
  double min_random = 0, median_random = 0;
};

/// Haar-distributed orthonormal rows x k block (thin Q of a Gaussian matrix).
inline Eigen::MatrixXd random_orthonormal(Eigen::Index rows, Eigen::Index k, Rng& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd g(rows, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = nd(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, k);
  // Fix the sign convention so the distribution is Haar rather than QR-biased.
  const Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j)
    if (r(j, j) < 0) q.col(j) *= -1;
  return q;
}

inline MinimalityReport check_minimality(const SupraMatrix& m, int k, int trials, std::uint64_t seed) {
  MinimalityReport rep;
  rep.trials = trials;
  if (trials <= 0) return rep;
  if (k < 1 || k > m.rows()) throw Error("check_minimality: k out of range");
  const EigenResult eig = dense_reference(m, k, std::max(5000, m.rows()));
  rep.optimum = quadratic_trace(m, eig.vectors);
  for (int i = 0; i < trials; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const double obj = quadratic_trace(m, random_orthonormal(m.rows(), k, rng));
    rep.objectives.push_back(obj);
    if (obj < rep.optimum - 1e-9) ++rep.violations;
  }
  std::vector<double> sorted = rep.objectives;
  std::sort(sorted.begin(), sorted.end());
  rep.min_random = sorted.front();
  const std::size_t h = sorted.size() / 2;
  rep.median_random = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
  return rep;
}

// ---------------------------------------------------------------------------
// Coupled vs uncoupled eigenvectors on stacked path graphs

struct ConsistencyDemo {
  int path_length = 0, layers = 0, k = 0;
  double mu = 0;
  std::vector<Eigen::MatrixXd> coupled;    // per-layer blocks of the supra eigenvectors
  std::vector<Eigen::MatrixXd> uncoupled;  // per-layer eigenvectors, alternating signs, scaled by 1/sqrt(T)
  SmoothnessReport coupled_report;         // both evaluated in the same mu objective
  SmoothnessReport uncoupled_report;
  double coupled_inter = 0;  // sum_t ||X_t - X_{t-1}||_F^2, without mu
  double uncoupled_inter = 0;
};

inline TemporalGraph stacked_paths(int path_length, int layers) {
  std::vector<Edge> path;
  for (int v = 0; v + 1 < path_length; ++v) path.push_back({v, v + 1, 1.0});
  return make_temporal_graph(std::vector<std::vector<Edge>>(layers, path), path_length);
}

/// Eigenvectors of T stacked copies of a path graph, once with mu coupling and
/// once solved per layer with no coupling. The uncoupled solution flips the
/// sign of every other layer, which is the worst case for temporal consistency
/// and still a valid set of per-layer eigenvectors.
inline ConsistencyDemo inter_layer_consistency_demo(int path_length, int layers, double mu, int k = 2) {
  if (path_length < 2 || layers < 2) throw Error("consistency demo: need path_length >= 2 and T >= 2");
  if (k < 1 || k > path_length) throw Error("consistency demo: k out of range");
  ConsistencyDemo d;
  d.path_length = path_length;
  d.layers = layers;
  d.k = k;
  d.mu = mu;
  const TemporalGraph g = stacked_paths(path_length, layers);
  const SupraOptions full{mu, false, false};
  const auto layer_ls = layer_laplacians(g, full);
  const SupraMatrix supra = build_supra_laplacian(g, full);

  d.coupled = split_blocks(dense_reference(supra, k, supra.rows()).vectors, layers);
  const double scale = 1.0 / std::sqrt(static_cast<double>(layers));
  for (int t = 0; t < layers; ++t) {
    Eigen::MatrixXd u = dense_reference(layer_ls[t], k, path_length).vectors;
    d.uncoupled.push_back((t % 2 ? -scale : scale) * u);
  }
  d.coupled_report = evaluate_objective(layer_ls, supra, d.coupled, mu);
  d.uncoupled_report = evaluate_objective(layer_ls, supra, d.uncoupled, mu);
  d.coupled_inter = d.coupled_report.inter_sum() / mu;
  d.uncoupled_inter = d.uncoupled_report.inter_sum() / mu;
  return d;
}

/// CSV `t,component,coupled_value,uncoupled_value` for eigenvector `column`;
/// component is the node index along the path.
inline void write_consistency_csv(std::ostream& out, const ConsistencyDemo& d, int column = 1) {
  if (column < 0 || column >= d.k) throw Error("consistency demo: column out of range");
  out << "t,component,coupled_value,uncoupled_value\n";
  for (int t = 0; t < d.layers; ++t)
    for (int v = 0; v < d.path_length; ++v)
      out << t << ',' << v << ',' << format_real(d.coupled[t](v, column)) << ','
          << format_real(d.uncoupled[t](v, column)) << '\n';
}

}  // namespace slpe
