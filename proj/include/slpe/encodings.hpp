#pragma once

// Positional-encoding tables built from supra-Laplacian (SLPE) or per-layer
// Laplacian (LPE) eigenvectors, in Exact / Inexact / Trajectory variants.

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cctype>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "slpe/common.hpp"
#include "slpe/eigensolve.hpp"
#include "slpe/supra.hpp"
#include "slpe/temporal_graph.hpp"

namespace slpe {

enum class PeKind { slpe, lpe };
enum class Variant { exact, inexact, trajectory };

struct PeVariant {
  PeKind kind = PeKind::slpe;
  Variant variant = Variant::exact;

  static PeVariant parse(const std::string& s) {
    PeVariant v;
    std::string lower;
    for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    auto dash = lower.find('-');
    if (dash == std::string::npos) throw Error("invalid PE variant '" + s + "'");
    const std::string kind = lower.substr(0, dash), tag = lower.substr(dash + 1);
    if (kind == "slpe") v.kind = PeKind::slpe;
    else if (kind == "lpe") v.kind = PeKind::lpe;
    else throw Error("invalid PE variant '" + s + "'");
    if (tag == "e") v.variant = Variant::exact;
    else if (tag == "i") v.variant = Variant::inexact;
    else if (tag == "t") v.variant = Variant::trajectory;
    else throw Error("invalid PE variant '" + s + "'");
    return v;
  }

  std::string str() const {
    std::string out = kind == PeKind::slpe ? "slpe-" : "lpe-";
    out += variant == Variant::exact ? "e" : variant == Variant::inexact ? "i" : "t";
    return out;
  }

  friend bool operator==(const PeVariant&, const PeVariant&) = default;
};

struct PeOptions {
  SolverConfig solver;         // k, tol, seed, init; maxiter caps the I and T variants
  int exact_maxiter = 10000;   // Lanczos restart cycles for the E variant
  double mu = 1.0;
  bool global_nodes = true;    // add one global node per layer before building
  bool keep_global = false;    // keep global-node rows in the output table
  bool include_eigenvalues = false;
  bool drop_trivial = false;   // discard eigenpairs with eigenvalue below 1e-10
  bool use_weights = false;
};

using PeKey = std::pair<int, NodeId>;  // (absolute time step, node)

struct PETable {
  std::map<PeKey, std::vector<double>> entries;
  int c = 0;
  PeVariant variant;
  int k = 0;
  bool include_eigenvalues = false;
  Window window;
  std::uint64_t seed = 0;
  bool padded = false;       // some layer had fewer than k eigenpairs
  bool nonconverged = false;  // an Exact solve stopped before reaching tol
  std::vector<std::string> warnings;

  const std::vector<double>* find(int t, NodeId v) const {
    auto it = entries.find({t, v});
    return it == entries.end() ? nullptr : &it->second;
  }
};

/// Encoding of one matrix: per-row vectors plus what the solver reported.
struct EncodedMatrix {
  Eigen::MatrixXd rows;  // matrix rows x c
  EigenResult eigen;
  int pairs = 0;  // eigenpairs actually available (<= k)
  bool padded = false;
  bool fell_back_to_dense = false;
};

namespace detail {

constexpr double trivial_eigenvalue = 1e-10;

inline int trajectory_length(const SolverConfig& cfg) {
  return (cfg.maxiter + cfg.trajectory_stride - 1) / cfg.trajectory_stride;
}

inline EigenResult solve_for_variant(const SupraMatrix& l, Variant variant, const PeOptions& opt, int k,
                                     bool& dense_fallback) {
  SolverConfig cfg = opt.solver;
  cfg.k = k;
  dense_fallback = false;
  if (variant == Variant::exact) {
    cfg.maxiter = opt.exact_maxiter;
    cfg.capture_trajectory = false;
    return lanczos(l, cfg);
  }
  if (2 * k > l.rows()) {
    // Too small for a block iteration; the dense result stands in for it.
    dense_fallback = true;
    return dense_reference(l, k, std::max(cfg.dense_max_rows, l.rows()));
  }
  cfg.capture_trajectory = variant == Variant::trajectory;
  return lobpcg(l, cfg);
}

}  // namespace detail

/// Eigen-encodes a single Laplacian. `sign_seed` drives the random per-column
/// signs (applied only when `random_sign` is set, and always for trajectories).
inline EncodedMatrix encode_matrix(const SupraMatrix& l, Variant variant, const PeOptions& opt,
                                   std::uint64_t sign_seed, bool random_sign) {
  const int k = opt.solver.k;
  const Eigen::Index n = l.rows();
  EncodedMatrix out;
  if (n == 0) throw Error("encode_matrix: empty matrix");

  // Grow the solve until k non-trivial pairs are available when dropping trivial ones.
  int extra = 0;
  EigenResult res;
  std::vector<Eigen::Index> selected;
  for (;;) {
    const int limit = static_cast<int>(n);
    const int kk = std::min(k + extra, limit);
    res = detail::solve_for_variant(l, variant, opt, kk, out.fell_back_to_dense);
    selected.clear();
    int trivial = 0;
    for (Eigen::Index j = 0; j < res.values.size(); ++j) {
      if (opt.drop_trivial && res.values[j] < detail::trivial_eigenvalue) {
        ++trivial;
        continue;
      }
      if (static_cast<int>(selected.size()) < k) selected.push_back(j);
    }
    if (!opt.drop_trivial || trivial <= extra || kk == limit) break;
    extra = trivial;
  }
  out.pairs = static_cast<int>(selected.size());
  out.padded = out.pairs < k;

  if (variant != Variant::trajectory) {
    std::vector<double> sign(selected.size(), 1.0);
    if (random_sign) {
      Rng rng(sign_seed);
      std::bernoulli_distribution coin;
      for (auto& s : sign) s = coin(rng) ? 1.0 : -1.0;
    }
    const int c = opt.include_eigenvalues ? 2 * k : k;
    out.rows = Eigen::MatrixXd::Zero(n, c);
    for (std::size_t j = 0; j < selected.size(); ++j) {
      out.rows.col(j) = sign[j] * res.vectors.col(selected[j]);
      if (opt.include_eigenvalues) out.rows.col(k + j).setConstant(res.values[selected[j]]);
    }
  } else {
    const int K = detail::trajectory_length(opt.solver);
    if (res.trajectory.empty()) res.trajectory.push_back({res.values, res.vectors});
    // Early convergence: the fixed point repeats until K iterates are present.
    while (static_cast<int>(res.trajectory.size()) < K) res.trajectory.push_back(res.trajectory.back());
    Trajectory tr = build_trajectory(res, sign_seed);
    const Eigen::Index kk = res.values.size();
    const int c = opt.include_eigenvalues ? 2 * K * k : K * k;
    out.rows = Eigen::MatrixXd::Zero(n, c);
    for (int it = 0; it < K; ++it)
      for (std::size_t j = 0; j < selected.size(); ++j) {
        out.rows.col(it * k + j) = tr.vectors.col(it * kk + selected[j]);
        if (opt.include_eigenvalues) out.rows.col(K * k + it * k + j).setConstant(tr.values[it * kk + selected[j]]);
      }
  }
  out.eigen = std::move(res);
  return out;
}

inline int pe_width(Variant variant, const PeOptions& opt) {
  const int base = variant == Variant::trajectory ? detail::trajectory_length(opt.solver) * opt.solver.k : opt.solver.k;
  return opt.include_eigenvalues ? 2 * base : base;
}

namespace detail {

inline PETable empty_table(PeKind kind, Variant variant, const Window& w, const PeOptions& opt) {
  PETable t;
  t.variant = {kind, variant};
  t.k = opt.solver.k;
  t.c = pe_width(variant, opt);
  t.include_eigenvalues = opt.include_eigenvalues;
  t.window = w;
  t.seed = opt.solver.seed;
  return t;
}

inline void scatter(PETable& table, const TemporalGraph& windowed, const SupraIndexMap& map,
                    const Eigen::MatrixXd& rows, bool keep_global) {
  for (int r = 0; r < map.size(); ++r) {
    const auto [t, v] = map.entries[r];
    if (!keep_global && windowed.is_global_id(v)) continue;
    std::vector<double> vec(rows.cols());
    for (Eigen::Index c = 0; c < rows.cols(); ++c) vec[c] = rows(r, c);
    table.entries[{table.window.start + t, v}] = std::move(vec);
  }
}

}  // namespace detail

/// Everything produced along the SLPE pipeline, for inspection and tests.
struct SlpeRun {
  PETable table;
  TemporalGraph windowed;  // after slicing and global-node insertion
  SupraMatrix laplacian;
  EncodedMatrix encoded;
};

inline SlpeRun compute_slpe_run(const TemporalGraph& g, const Window& w, Variant variant, const PeOptions& opt) {
  opt.solver.validate();
  SlpeRun run;
  run.windowed = slice(g, w);
  if (opt.global_nodes) run.windowed = add_global_nodes(run.windowed);
  run.laplacian = build_supra_laplacian(run.windowed, {opt.mu, true, opt.use_weights});
  if (run.laplacian.empty()) throw Error("compute_slpe: every layer of the window is edgeless");
  if (opt.solver.k > run.laplacian.rows()) throw Error("compute_slpe: k exceeds the number of supra rows");

  run.encoded = encode_matrix(run.laplacian, variant, opt, derive_seed(opt.solver.seed, 0x5157), false);
  run.table = detail::empty_table(PeKind::slpe, variant, w, opt);
  run.table.padded = run.encoded.padded;
  if (variant == Variant::exact && !run.encoded.eigen.converged) {
    run.table.nonconverged = true;
    run.table.warnings.push_back("supra-Laplacian eigensolve did not converge");
  }
  detail::scatter(run.table, run.windowed, run.laplacian.index_map(), run.encoded.rows, opt.keep_global);
  return run;
}

/// Supra-Laplacian positional encodings for the window.
inline PETable compute_slpe(const TemporalGraph& g, const Window& w, Variant variant, const PeOptions& opt) {
  return compute_slpe_run(g, w, variant, opt).table;
}

/// Per-layer Laplacian positional encodings; layers are solved independently
/// (in parallel) with their own derived seeds and random column signs.
inline PETable compute_lpe(const TemporalGraph& g, const Window& w, Variant variant, const PeOptions& opt,
                           unsigned threads = 0) {
  opt.solver.validate();
  TemporalGraph windowed = slice(g, w);
  if (opt.global_nodes) windowed = add_global_nodes(windowed);
  const auto layers = layer_laplacians(windowed, {opt.mu, true, opt.use_weights});

  std::vector<std::optional<EncodedMatrix>> encoded(layers.size());
  std::vector<std::string> errors(layers.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next++) < layers.size();) {
      if (layers[t].empty()) continue;
      try {
        encoded[t] = encode_matrix(layers[t], variant, opt, derive_seed(opt.solver.seed, 0x1000 + t), true);
      } catch (const std::exception& e) {
        errors[t] = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, layers.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
  }
  for (std::size_t t = 0; t < layers.size(); ++t)
    if (!errors[t].empty()) throw Error("compute_lpe: layer " + std::to_string(t) + ": " + errors[t]);

  PETable table = detail::empty_table(PeKind::lpe, variant, w, opt);
  bool any_rows = false;
  for (std::size_t t = 0; t < layers.size(); ++t) {
    if (!encoded[t]) continue;
    any_rows = true;
    table.padded = table.padded || encoded[t]->padded;
    if (variant == Variant::exact && !encoded[t]->eigen.converged) {
      table.nonconverged = true;
      table.warnings.push_back("layer " + std::to_string(t) + " eigensolve did not converge");
    }
    detail::scatter(table, windowed, layers[t].index_map(), encoded[t]->rows, opt.keep_global);
  }
  if (!any_rows) throw Error("compute_lpe: every layer of the window is edgeless");
  return table;
}

inline PETable compute_pe(const TemporalGraph& g, const Window& w, PeVariant v, const PeOptions& opt) {
  return v.kind == PeKind::slpe ? compute_slpe(g, w, v.variant, opt) : compute_lpe(g, w, v.variant, opt);
}

// ---------------------------------------------------------------------------

using FeatureMap = std::map<NodeId, std::vector<double>>;

/// [features || PE] per node at time t; features come first.
inline FeatureMap concat_features(const FeatureMap& features, const PETable& pe, int t, bool pad_missing) {
  std::optional<std::size_t> width;
  for (const auto& [v, f] : features) {
    if (width && *width != f.size()) throw Error("feature width mismatch at node " + std::to_string(v));
    width = f.size();
  }
  for (auto it = pe.entries.lower_bound({t, std::numeric_limits<NodeId>::min()});
       it != pe.entries.end() && it->first.first == t; ++it)
    if (!features.count(it->first.second))
      throw Error("missing feature row for node " + std::to_string(it->first.second));

  FeatureMap out;
  for (const auto& [v, f] : features) {
    const auto* p = pe.find(t, v);
    if (!p && !pad_missing) continue;
    std::vector<double> row = f;
    if (p) row.insert(row.end(), p->begin(), p->end());
    else row.resize(f.size() + pe.c, 0.0);
    out.emplace(v, std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// PE text format

inline void write_pe(std::ostream& out, const PETable& pe) {
  out << "#pe variant=" << pe.variant.str() << " k=" << pe.k << " c=" << pe.c << " window=" << pe.window.start << ','
      << pe.window.length << " seed=" << pe.seed << '\n';
  for (const auto& [key, vec] : pe.entries) {
    out << key.first << ' ' << key.second;
    for (double x : vec) out << ' ' << format_real(x);
    out << '\n';
  }
}

inline PETable read_pe(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("#pe ", 0) != 0) throw ParseError("missing #pe header", 1);
  PETable pe;
  std::istringstream hs(header.substr(4));
  std::string field;
  bool have_variant = false, have_k = false, have_c = false, have_window = false;
  while (hs >> field) {
    auto eq = field.find('=');
    if (eq == std::string::npos) throw ParseError("malformed header field '" + field + "'", 1);
    const std::string key = field.substr(0, eq), val = field.substr(eq + 1);
    if (key == "variant") pe.variant = PeVariant::parse(val), have_variant = true;
    else if (key == "k") pe.k = std::stoi(val), have_k = true;
    else if (key == "c") pe.c = std::stoi(val), have_c = true;
    else if (key == "seed") pe.seed = std::stoull(val);
    else if (key == "window") {
      auto comma = val.find(',');
      if (comma == std::string::npos) throw ParseError("malformed window", 1);
      pe.window = {std::stoi(val.substr(0, comma)), std::stoi(val.substr(comma + 1))};
      have_window = true;
    }
  }
  if (!(have_variant && have_k && have_c && have_window)) throw ParseError("incomplete #pe header", 1);
  pe.include_eigenvalues = pe.variant.variant != Variant::trajectory && pe.c == 2 * pe.k;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = detail::split_fields(line);
    if (f.size() != static_cast<std::size_t>(pe.c) + 2) throw ParseError("row width differs from c", lineno);
    NodeId t = 0, v = 0;
    if (!detail::parse_int(f[0], t) || !detail::parse_int(f[1], v)) throw ParseError("bad row key", lineno);
    std::vector<double> vec(pe.c);
    for (int j = 0; j < pe.c; ++j)
      if (!detail::parse_real(f[j + 2], vec[j])) throw ParseError("bad value", lineno);
    pe.entries[{static_cast<int>(t), v}] = std::move(vec);
  }
  return pe;
}

}  // namespace slpe
