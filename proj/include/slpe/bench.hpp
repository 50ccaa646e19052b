#pragma once

// Solver timing on synthetic Barabási–Albert temporal graphs.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "slpe/common.hpp"
#include "slpe/eigensolve.hpp"
#include "slpe/supra.hpp"
#include "slpe/temporal_graph.hpp"

namespace slpe {

/// One preferential-attachment graph: a clique on nodes 0..m-1, then every
/// further node links to m distinct earlier nodes chosen proportionally to
/// degree (uniformly while no earlier node has an edge yet).
inline std::vector<Edge> generate_ba_layer(NodeId n, int m, Rng& rng) {
  if (m < 1 || n <= m) throw Error("generate_ba: need n > m >= 1");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>((n - m) * m + m * (m - 1) / 2));
  std::vector<NodeId> ends;  // every edge endpoint, so sampling from it is degree-proportional
  for (NodeId u = 0; u < m; ++u)
    for (NodeId v = u + 1; v < m; ++v) {
      edges.push_back({u, v, 1.0});
      ends.push_back(u);
      ends.push_back(v);
    }
  std::vector<NodeId> picked;
  for (NodeId v = m; v < n; ++v) {
    picked.clear();
    while (static_cast<int>(picked.size()) < m) {
      NodeId cand;
      if (ends.empty()) cand = std::uniform_int_distribution<NodeId>(0, v - 1)(rng);
      else cand = ends[std::uniform_int_distribution<std::size_t>(0, ends.size() - 1)(rng)];
      if (std::find(picked.begin(), picked.end(), cand) == picked.end()) picked.push_back(cand);
    }
    for (NodeId u : picked) {
      edges.push_back({u, v, 1.0});
      ends.push_back(u);
      ends.push_back(v);
    }
  }
  return edges;
}

/// T mutually independent BA layers on the same n nodes (all active everywhere).
inline TemporalGraph generate_ba_temporal(NodeId n, int m, int T, std::uint64_t seed) {
  if (T < 1) throw Error("generate_ba: T must be at least 1");
  std::vector<std::vector<Edge>> layers;
  for (int t = 0; t < T; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    layers.push_back(generate_ba_layer(n, m, rng));
  }
  TemporalGraph g = make_temporal_graph(layers, n);
  g.name = "ba-n" + std::to_string(n) + "-m" + std::to_string(m) + "-T" + std::to_string(T);
  return g;
}

enum class BenchTarget { supra, single_layer };

inline BenchTarget parse_bench_target(const std::string& s) {
  if (s == "supra") return BenchTarget::supra;
  if (s == "single" || s == "single-layer" || s == "layer") return BenchTarget::single_layer;
  throw Error("unknown bench target '" + s + "'");
}

inline Method parse_method(const std::string& s) {
  if (s == "dense") return Method::dense;
  if (s == "lanczos") return Method::lanczos;
  if (s == "lobpcg") return Method::lobpcg;
  throw Error("unknown solver '" + s + "'");
}

struct BenchSpec {
  std::vector<NodeId> sizes{1000};
  int ba_m = 3;
  int T = 3;
  int k = 8;
  int repeats = 5;
  bool warmup = true;  // one untimed solve before the timed ones
  double mu = 1.0;
  std::uint64_t seed = 0;
  std::vector<Method> solvers{Method::lanczos, Method::lobpcg};
  std::map<Method, SolverConfig> solver_cfgs;  // overrides; defaults below

  SolverConfig config_for(Method m) const {
    if (auto it = solver_cfgs.find(m); it != solver_cfgs.end()) return it->second;
    SolverConfig c = m == Method::lobpcg ? SolverConfig{} : SolverConfig::exact(k, seed);
    c.k = k;
    c.seed = seed;
    return c;
  }

  void validate() const {
    if (sizes.empty()) throw Error("bench: no sizes");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (sizes[i] <= 0) throw Error("bench: sizes must be positive");
      if (i > 0 && sizes[i] <= sizes[i - 1]) throw Error("bench: sizes must be strictly ascending");
    }
    if (repeats < 1) throw Error("bench: repeats must be at least 1");
    if (k < 1) throw Error("bench: k must be at least 1");
    if (solvers.empty()) throw Error("bench: no solvers");
  }
};

struct BenchRow {
  NodeId size = 0;
  Method solver = Method::lanczos;
  int rows = 0;  // matrix dimension actually solved
  double median_ms = 0, min_ms = 0, max_ms = 0;
  double residual_max = 0;
  bool converged = false;
  std::string status = "ok";  // "ok", "refused: ...", "failed: ..."
  std::vector<double> times_ms;

  bool ok() const { return status == "ok"; }
};

struct BenchReport {
  BenchTarget target = BenchTarget::supra;
  std::vector<BenchRow> rows;

  const BenchRow* find(NodeId size, Method m) const {
    for (const auto& r : rows)
      if (r.size == size && r.solver == m) return &r;
    return nullptr;
  }

  /// size -> median Lanczos time / median LOBPCG time, for sizes where both ran.
  std::vector<std::pair<NodeId, double>> speedups() const {
    std::vector<std::pair<NodeId, double>> out;
    for (const auto& r : rows) {
      if (r.solver != Method::lobpcg || !r.ok()) continue;
      const auto* lz = find(r.size, Method::lanczos);
      if (lz && lz->ok()) out.emplace_back(r.size, lz->median_ms / r.median_ms);
    }
    return out;
  }
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline SupraMatrix bench_matrix(const TemporalGraph& g, BenchTarget target, double mu) {
  if (target == BenchTarget::supra) return build_supra_laplacian(g, {mu, true, false});
  return layer_laplacians(slice(g, {0, 1}), {mu, true, false}).front();
}

/// Times one solver on one matrix: an optional warm-up solve, then `repeats` timed solves.
inline BenchRow time_solver(const SupraMatrix& l, NodeId size, Method method, const SolverConfig& cfg, int repeats,
                            bool warmup = true) {
  BenchRow row;
  row.size = size;
  row.solver = method;
  row.rows = l.rows();
  if (method == Method::dense && l.rows() > cfg.dense_max_rows) {
    row.status = "refused: dense budget";
    return row;
  }
  try {
    if (warmup) (void)solve(l, method, cfg);
    for (int r = 0; r < repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      EigenResult res = solve(l, method, cfg);
      const auto t1 = std::chrono::steady_clock::now();
      row.times_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      const double rmax = res.residual_norms.size() ? res.residual_norms.maxCoeff() : 0.0;
      row.residual_max = std::max(row.residual_max, rmax);
      row.converged = r == 0 ? res.converged : row.converged && res.converged;
    }
    row.median_ms = median_of(row.times_ms);
    row.min_ms = *std::min_element(row.times_ms.begin(), row.times_ms.end());
    row.max_ms = *std::max_element(row.times_ms.begin(), row.times_ms.end());
  } catch (const std::exception& e) {
    row.status = std::string("failed: ") + e.what();
  }
  return row;
}

inline BenchReport run_bench(const BenchSpec& spec, BenchTarget target) {
  spec.validate();
  BenchReport report;
  report.target = target;
  for (NodeId n : spec.sizes) {
    SupraMatrix l;
    try {
      const TemporalGraph g = generate_ba_temporal(n, spec.ba_m, target == BenchTarget::supra ? spec.T : 1,
                                                   derive_seed(spec.seed, static_cast<std::uint64_t>(n)));
      l = bench_matrix(g, target, spec.mu);
    } catch (const std::exception& e) {
      for (Method m : spec.solvers) {
        BenchRow row;
        row.size = n;
        row.solver = m;
        row.status = std::string("failed: ") + e.what();
        report.rows.push_back(row);
      }
      continue;
    }
    for (Method m : spec.solvers) {
      log_info("bench: size " + std::to_string(n) + " solver " + to_string(m));
      report.rows.push_back(time_solver(l, n, m, spec.config_for(m), spec.repeats, spec.warmup));
    }
  }
  return report;
}

inline void write_bench_csv(std::ostream& out, const BenchReport& r) {
  out << "size,solver,median_ms,min_ms,max_ms,residual_max,converged,status\n";
  char buf[64];
  auto ms = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };
  for (const auto& row : r.rows) {
    out << row.size << ',' << to_string(row.solver) << ',';
    if (row.ok())
      out << ms(row.median_ms) << ',' << ms(row.min_ms) << ',' << ms(row.max_ms) << ','
          << format_real(row.residual_max) << ',' << (row.converged ? "true" : "false");
    else
      out << ",,,,";
    out << ',' << row.status << '\n';
  }
}

/// Plot-ready speedup table: `size,lanczos_ms,lobpcg_ms,speedup`.
inline void write_speedup_table(std::ostream& out, const BenchReport& r) {
  out << "size,lanczos_ms,lobpcg_ms,speedup\n";
  char buf[128];
  for (const auto& [size, s] : r.speedups()) {
    std::snprintf(buf, sizeof buf, "%.3f,%.3f,%.3f", r.find(size, Method::lanczos)->median_ms,
                  r.find(size, Method::lobpcg)->median_ms, s);
    out << size << ',' << buf << '\n';
  }
}

}  // namespace slpe
