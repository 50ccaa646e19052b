#pragma once

// Smallest-eigenpair solvers for sparse symmetric positive semi-definite
// matrices: a dense reference, a thick-restart Lanczos run to convergence and
// an unpreconditioned LOBPCG that may be capped after a few iterations.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "slpe/common.hpp"
#include "slpe/supra.hpp"

namespace slpe {

enum class Method { dense, lanczos, lobpcg };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::dense: return "dense";
    case Method::lanczos: return "lanczos";
    case Method::lobpcg: return "lobpcg";
  }
  return "?";
}

enum class InitKind { normal, rademacher, uniform, warm_start };

inline InitKind parse_init(const std::string& s) {
  if (s == "normal") return InitKind::normal;
  if (s == "rademacher") return InitKind::rademacher;
  if (s == "uniform") return InitKind::uniform;
  if (s == "warm-start" || s == "with_old_pes") return InitKind::warm_start;
  throw Error("unknown initialization '" + s + "'");
}

struct SolverConfig {
  int k = 8;
  double tol = 1e-8;
  int maxiter = 20;
  std::uint64_t seed = 0;
  InitKind init = InitKind::normal;
  Eigen::MatrixXd warm_start;  // rows x k, used when init == warm_start
  bool capture_trajectory = false;
  int trajectory_stride = 1;
  std::size_t trajectory_budget = 100'000'000;  // max stored reals, K * k * rows
  int subspace = 0;                              // Lanczos basis size, 0 = automatic
  int dense_max_rows = 5000;

  void validate() const {
    if (k < 1) throw Error("solver: k must be at least 1");
    if (!(tol > 0)) throw Error("solver: tol must be positive");
    if (maxiter < 1) throw Error("solver: maxiter must be at least 1");
    if (trajectory_stride < 1) throw Error("solver: trajectory stride must be at least 1");
  }

  /// Settings for the converged (Exact) regime.
  static SolverConfig exact(int k, std::uint64_t seed = 0) {
    SolverConfig c;
    c.k = k;
    c.seed = seed;
    c.maxiter = 10000;
    return c;
  }
};

struct IterateSnapshot {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

struct EigenResult {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // rows x k, column j pairs with values[j]
  Method method = Method::dense;
  int iterations = 0;
  bool converged = false;
  Eigen::VectorXd residual_norms;
  std::vector<IterateSnapshot> trajectory;
  int p_block_drops = 0;  // LOBPCG iterations that discarded the search direction block
  std::vector<std::string> warnings;
};

/// ||A v_j - lambda_j v_j||_2 for every column.
inline Eigen::VectorXd residual_norms(const SupraMatrix& a, const Eigen::VectorXd& values,
                                      const Eigen::MatrixXd& vectors) {
  Eigen::MatrixXd r = a.multiply(vectors);
  r -= vectors * values.asDiagonal();
  return r.colwise().norm().transpose();
}

namespace detail {

inline Eigen::MatrixXd random_block(Eigen::Index n, Eigen::Index k, InitKind kind, Rng& rng) {
  Eigen::MatrixXd x(n, k);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::bernoulli_distribution coin;
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      switch (kind) {
        case InitKind::rademacher: x(i, j) = coin(rng) ? 1.0 : -1.0; break;
        case InitKind::uniform: x(i, j) = uniform(rng); break;
        default: x(i, j) = normal(rng); break;
      }
    }
  return x;
}

/// Orthonormal basis for span(w) projected onto the complement of span(q)
/// (q orthonormal, may be empty). Columns are scaled to unit norm, projected
/// twice and orthonormalized by SVQB; directions whose singular value falls
/// below `drop` are discarded. `dropped` receives the rank lost.
inline Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& w, const Eigen::MatrixXd& q, double drop,
                                      int* dropped = nullptr) {
  Eigen::MatrixXd v(w.rows(), w.cols());
  Eigen::Index cols = 0;
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    const double norm = w.col(j).norm();
    if (norm > 0 && std::isfinite(norm)) v.col(cols++) = w.col(j) / norm;
  }
  v.conservativeResize(Eigen::NoChange, cols);
  for (int pass = 0; pass < 2 && v.cols() > 0; ++pass) {
    if (q.cols() > 0) v -= q * (q.transpose() * v);
    Eigen::MatrixXd gram = v.transpose() * v;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (gram + gram.transpose()));
    const Eigen::VectorXd& d = es.eigenvalues();
    Eigen::Index first = 0;
    while (first < d.size() && !(d[first] > drop * drop)) ++first;
    const Eigen::Index rank = d.size() - first;
    Eigen::MatrixXd transform = es.eigenvectors().rightCols(rank);
    for (Eigen::Index j = 0; j < rank; ++j) transform.col(j) /= std::sqrt(d[first + j]);
    v = v * transform;
  }
  if (dropped) *dropped = static_cast<int>(w.cols() - v.cols());
  return v;
}

inline void sort_ascending(Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  std::vector<Eigen::Index> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  Eigen::VectorXd v(values.size());
  Eigen::MatrixXd x(vectors.rows(), vectors.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    v[i] = values[order[i]];
    x.col(i) = vectors.col(order[i]);
  }
  values = std::move(v);
  vectors = std::move(x);
}

inline void check_capture_budget(const SolverConfig& cfg, Eigen::Index rows) {
  if (!cfg.capture_trajectory) return;
  const double snapshots = std::ceil(static_cast<double>(cfg.maxiter) / cfg.trajectory_stride);
  if (snapshots * cfg.k * static_cast<double>(rows) > static_cast<double>(cfg.trajectory_budget))
    throw Error("trajectory capture refused: K*k*rows exceeds the element budget of " +
                std::to_string(cfg.trajectory_budget));
}

inline void normalize_columns(Eigen::MatrixXd& x) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) x.col(j).normalize();
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// Full dense symmetric eigendecomposition; refuses matrices above the row budget.
inline EigenResult dense_reference(const SupraMatrix& m, int k, int max_rows = 5000) {
  if (m.rows() > max_rows)
    throw Error("dense budget exceeded: " + std::to_string(m.rows()) + " rows > " + std::to_string(max_rows));
  if (k < 1 || k > m.rows()) throw Error("dense_reference: k must be in [1, rows]");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.to_dense());
  if (es.info() != Eigen::Success) throw Error("dense eigendecomposition failed");
  EigenResult r;
  r.method = Method::dense;
  r.values = es.eigenvalues().head(k);
  r.vectors = es.eigenvectors().leftCols(k);
  r.iterations = 1;
  r.converged = true;
  r.residual_norms = residual_norms(m, r.values, r.vectors);
  return r;
}

/// Thick-restart Lanczos with full reorthogonalization and locking.
///
/// Each iteration is one restart cycle: the Krylov basis is extended to the
/// subspace size, a Rayleigh-Ritz step is taken on the projected matrix and
/// Ritz pairs whose true residual is within tolerance are locked (deflated).
/// Once k pairs are locked, a fresh random start in the complement of the
/// locked space checks that no smaller eigenvalue was missed, which is what
/// makes repeated eigenvalues come out with their full multiplicity.
inline EigenResult lanczos(const SupraMatrix& a, const SolverConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = a.rows();
  const int k = cfg.k;
  if (k > n) throw Error("lanczos: k exceeds the matrix dimension");
  detail::check_capture_budget(cfg, n);

  Rng rng(cfg.seed);
  const int target_m = cfg.subspace > 0 ? cfg.subspace : std::max(2 * k + 8, k + 32);

  EigenResult res;
  res.method = Method::lanczos;

  Eigen::MatrixXd locked(n, 0);
  Eigen::VectorXd locked_vals(0);
  bool verifying = false;  // all k locked; looking for a smaller eigenvalue in the complement

  auto lock = [&](const Eigen::VectorXd& y, double theta) {
    locked.conservativeResize(Eigen::NoChange, locked.cols() + 1);
    locked.col(locked.cols() - 1) = y;
    locked_vals.conservativeResize(locked_vals.size() + 1);
    locked_vals[locked_vals.size() - 1] = theta;
  };

  auto start_vector = [&](bool first) {
    Eigen::VectorXd v;
    if (first && cfg.init == InitKind::warm_start && cfg.warm_start.rows() == n && cfg.warm_start.cols() > 0)
      v = cfg.warm_start.rowwise().sum();
    else
      v = detail::random_block(n, 1, first ? cfg.init : InitKind::normal, rng).col(0);
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::MatrixXd o = detail::orthonormalize(v, locked, 1e-8);
      if (o.cols() == 1) return Eigen::VectorXd(o.col(0));
      v = detail::random_block(n, 1, InitKind::normal, rng).col(0);
    }
    throw Error("lanczos: could not draw a start vector outside the locked space");
  };

  Eigen::MatrixXd basis;
  Eigen::MatrixXd h;
  int kept = 0;  // leading basis vectors carried over from the previous cycle
  Eigen::VectorXd ritz_vals;
  Eigen::MatrixXd ritz_vecs;  // current best unlocked Ritz vectors (for reporting)

  auto best_estimate = [&](Eigen::VectorXd& vals, Eigen::MatrixXd& vecs) {
    const Eigen::Index from_active = std::min<Eigen::Index>(k - locked.cols(), ritz_vecs.cols());
    vals.resize(locked.cols() + std::max<Eigen::Index>(from_active, 0));
    vecs.resize(n, vals.size());
    vals.head(locked.cols()) = locked_vals;
    vecs.leftCols(locked.cols()) = locked;
    if (from_active > 0) {
      vals.tail(from_active) = ritz_vals.head(from_active);
      vecs.rightCols(from_active) = ritz_vecs.leftCols(from_active);
    }
    detail::sort_ascending(vals, vecs);
    if (vals.size() > k) {
      vals.conservativeResize(k);
      vecs.conservativeResize(Eigen::NoChange, k);
    }
  };

  bool need_fresh_start = true;
  bool first_start = true;
  while (true) {
    const Eigen::Index complement = n - locked.cols();
    if (complement == 0) {
      res.converged = locked.cols() >= k;
      break;
    }
    const int m = static_cast<int>(std::min<Eigen::Index>(target_m, complement));
    if (need_fresh_start) {
      basis.resize(n, m + 1);
      h = Eigen::MatrixXd::Zero(m, m);
      basis.col(0) = start_vector(first_start);
      first_start = false;
      kept = 0;
      need_fresh_start = false;
    }

    // Extend the Krylov basis from `kept` to m vectors.
    int m_eff = m;
    double beta = 0.0;
    bool basis_full = false;
    for (int j = kept; j < m; ++j) {
      Eigen::VectorXd w = a.multiply(basis.col(j));
      Eigen::VectorXd coef = Eigen::VectorXd::Zero(j + 1);
      for (int pass = 0; pass < 2; ++pass) {
        if (locked.cols() > 0) w -= locked * (locked.transpose() * w);
        Eigen::VectorXd c = basis.leftCols(j + 1).transpose() * w;
        w -= basis.leftCols(j + 1) * c;
        coef += c;
      }
      for (int i = 0; i <= j; ++i) h(i, j) = h(j, i) = coef[i];
      beta = w.norm();
      if (locked.cols() + j + 1 == n) {
        m_eff = j + 1;
        beta = 0.0;
        basis_full = true;
        break;
      }
      const double scale = std::max(1.0, std::abs(coef[j]));
      if (beta <= 1e-12 * scale) {
        // Invariant subspace reached: continue with a random direction.
        Eigen::MatrixXd q(n, locked.cols() + j + 1);
        q << locked, basis.leftCols(j + 1);
        Eigen::MatrixXd fresh;
        for (int attempt = 0; attempt < 8 && fresh.cols() == 0; ++attempt)
          fresh = detail::orthonormalize(detail::random_block(n, 1, InitKind::normal, rng), q, 1e-8);
        if (fresh.cols() == 0) throw Error("lanczos: breakdown recovery failed");
        basis.col(j + 1) = fresh.col(0);
        beta = 0.0;
        if (j == m - 1) m_eff = m;
      } else {
        basis.col(j + 1) = w / beta;
      }
    }

    // Rayleigh-Ritz on the projected matrix.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.topLeftCorner(m_eff, m_eff));
    const Eigen::VectorXd theta = es.eigenvalues();
    const Eigen::MatrixXd s = es.eigenvectors();
    ++res.iterations;

    // Locking uses a tenth of the tolerance: residual leakage of locked
    // vectors into the complement would otherwise stall later pairs at tol.
    const double lock_tol = 0.1 * cfg.tol;
    const int want = verifying ? 1 : k - static_cast<int>(locked.cols());
    const int consider = std::min(want, m_eff);
    Eigen::MatrixXd y = basis.leftCols(m_eff) * s.leftCols(consider);
    detail::normalize_columns(y);
    std::vector<int> newly_locked;
    for (int j = 0; j < consider; ++j) {
      const double estimate = std::abs(beta * s(m_eff - 1, j));
      if (estimate > lock_tol && !basis_full) continue;
      Eigen::VectorXd r = a.multiply(y.col(j)) - theta[j] * y.col(j);
      if (r.norm() <= lock_tol || basis_full) newly_locked.push_back(j);
    }

    if (verifying) {
      if (!newly_locked.empty()) {
        const double smallest = theta[0];
        const double largest_locked = locked_vals.maxCoeff();
        if (smallest < largest_locked - cfg.tol) {
          // A missed eigenvalue: swap it in for the largest locked one.
          Eigen::Index worst;
          locked_vals.maxCoeff(&worst);
          locked.col(worst) = y.col(0);
          locked_vals[worst] = smallest;
          need_fresh_start = true;
        } else {
          res.converged = true;
        }
      }
    } else {
      for (int j : newly_locked) lock(y.col(j), theta[j]);
      if (!newly_locked.empty()) log_debug("lanczos: locked " + std::to_string(locked.cols()) + "/" + std::to_string(k));
    }

    // Unlocked Ritz pairs in ascending order, used for reporting and restart.
    std::vector<int> free_idx;
    for (int j = 0; j < m_eff; ++j)
      if (std::find(newly_locked.begin(), newly_locked.end(), j) == newly_locked.end() || verifying)
        free_idx.push_back(j);
    ritz_vals.resize(free_idx.size());
    ritz_vecs.resize(n, std::min<Eigen::Index>(free_idx.size(), k));
    for (std::size_t i = 0; i < free_idx.size(); ++i) ritz_vals[i] = theta[free_idx[i]];
    for (Eigen::Index i = 0; i < ritz_vecs.cols(); ++i) {
      Eigen::VectorXd v = basis.leftCols(m_eff) * s.col(free_idx[i]);
      ritz_vecs.col(i) = v.normalized();
    }
    if (verifying) ritz_vecs.resize(n, 0);

    if (!verifying && locked.cols() >= k) {
      verifying = true;
      need_fresh_start = true;
    }

    if (cfg.capture_trajectory && (res.iterations - 1) % cfg.trajectory_stride == 0) {
      IterateSnapshot snap;
      best_estimate(snap.values, snap.vectors);
      res.trajectory.push_back(std::move(snap));
    }
    if (res.converged) break;
    if (res.iterations >= cfg.maxiter) break;
    if (need_fresh_start) continue;
    if (basis_full) {
      // The complement was exhausted by this cycle; nothing left to find.
      if (verifying) {
        res.converged = true;
        break;
      }
      need_fresh_start = true;
      continue;
    }

    // Thick restart: keep the smallest unlocked Ritz vectors plus the residual
    // direction. Both are orthogonal to the locked space already, and the
    // projected matrix restarts as diag(theta) with the arrow column filled in
    // by the next extension step.
    const int remaining_want = verifying ? 1 : k - static_cast<int>(locked.cols());
    int keep = std::min<int>(static_cast<int>(free_idx.size()), std::max(remaining_want + (m - remaining_want) / 2, 1));
    keep = std::min(keep, m - 1);
    if (keep <= 0) {
      need_fresh_start = true;
      continue;
    }
    Eigen::MatrixXd s_keep(m_eff, keep);
    for (int i = 0; i < keep; ++i) s_keep.col(i) = s.col(free_idx[i]);
    Eigen::MatrixXd kept_vecs = basis.leftCols(m_eff) * s_keep;
    Eigen::VectorXd residual_dir = basis.col(m_eff);
    const int new_m = static_cast<int>(std::min<Eigen::Index>(target_m, n - locked.cols()));
    basis.resize(n, new_m + 1);
    basis.leftCols(keep) = kept_vecs;
    basis.col(keep) = residual_dir;
    h = Eigen::MatrixXd::Zero(new_m, new_m);
    for (int i = 0; i < keep; ++i) h(i, i) = theta[free_idx[i]];
    kept = keep;
  }

  best_estimate(res.values, res.vectors);
  detail::normalize_columns(res.vectors);
  if (res.values.size() < k) {
    res.converged = false;
  }
  res.residual_norms = residual_norms(a, res.values, res.vectors);
  if (!res.converged) {
    res.warnings.push_back("lanczos did not converge within " + std::to_string(cfg.maxiter) + " cycles");
    log_warning(res.warnings.back());
  }
  return res;
}

/// Locally optimal block preconditioned conjugate gradient, without preconditioner.
///
/// One iteration is one Rayleigh-Ritz step over span[X, R, P], where R and P
/// only hold the columns whose residual is still above tol. When P becomes
/// numerically dependent on [X, R] it is discarded for that iteration and the
/// event counted in p_block_drops.
inline EigenResult lobpcg(const SupraMatrix& a, const SolverConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = a.rows();
  const int k = cfg.k;
  if (2 * static_cast<Eigen::Index>(k) > n) throw Error("lobpcg: k must not exceed rows/2");
  detail::check_capture_budget(cfg, n);

  Rng rng(cfg.seed);
  EigenResult res;
  res.method = Method::lobpcg;

  Eigen::MatrixXd x;
  if (cfg.init == InitKind::warm_start && cfg.warm_start.rows() == n && cfg.warm_start.cols() >= k)
    x = cfg.warm_start.leftCols(k);
  else
    x = detail::random_block(n, k, cfg.init, rng);
  x = detail::orthonormalize(x, Eigen::MatrixXd(n, 0), 1e-10);
  for (int attempt = 0; x.cols() < k && attempt < 16; ++attempt) {
    Eigen::MatrixXd extra = detail::orthonormalize(detail::random_block(n, k - x.cols(), InitKind::normal, rng), x, 1e-10);
    Eigen::MatrixXd joined(n, x.cols() + extra.cols());
    joined << x, extra;
    x = std::move(joined);
  }
  if (x.cols() < k) throw Error("lobpcg: could not build an initial block of rank k");

  Eigen::MatrixXd ax = a.multiply(x);
  {
    Eigen::MatrixXd g = x.transpose() * ax;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()));
    x = x * es.eigenvectors();
    ax = ax * es.eigenvectors();
    res.values = es.eigenvalues();
  }
  Eigen::MatrixXd p(n, 0);

  auto residual_block = [&]() { return Eigen::MatrixXd(ax - x * res.values.asDiagonal()); };

  for (int it = 1; it <= cfg.maxiter; ++it) {
    Eigen::MatrixXd r = residual_block();
    const Eigen::VectorXd rn = r.colwise().norm();
    // soft locking: converged columns stay in X but add no search directions
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < k; ++j)
      if (rn[j] > cfg.tol) active.push_back(j);
    if (active.empty()) {
      res.converged = true;
      break;
    }
    Eigen::MatrixXd w = detail::orthonormalize(r(Eigen::placeholders::all, active), x, 1e-10);
    Eigen::MatrixXd xw(n, x.cols() + w.cols());
    xw << x, w;
    if (p.cols() > 0) {
      int dropped = 0;
      Eigen::MatrixXd po = detail::orthonormalize(p(Eigen::placeholders::all, active), xw, 1e-8, &dropped);
      if (dropped > 0) {
        p.resize(n, 0);
        ++res.p_block_drops;
        log_debug("lobpcg: dropped P block at iteration " + std::to_string(it));
      } else {
        p = std::move(po);
      }
    }
    const Eigen::Index dim = xw.cols() + p.cols();
    Eigen::MatrixXd basis(n, dim);
    basis << xw, p;
    Eigen::MatrixXd abasis(n, dim);
    abasis.leftCols(k) = ax;
    a.multiply_into(basis.rightCols(dim - k), abasis.rightCols(dim - k));

    Eigen::MatrixXd g = basis.transpose() * abasis;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()));
    if (es.info() != Eigen::Success) throw Error("lobpcg: Rayleigh-Ritz eigensolve failed");
    const Eigen::MatrixXd c = es.eigenvectors().leftCols(k);
    res.values = es.eigenvalues().head(k);
    x = basis * c;
    ax = abasis * c;
    p = basis.rightCols(dim - k) * c.bottomRows(dim - k);
    res.iterations = it;

    if (cfg.capture_trajectory && (it - 1) % cfg.trajectory_stride == 0)
      res.trajectory.push_back({res.values, x});
  }

  res.vectors = x;
  detail::normalize_columns(res.vectors);
  res.residual_norms = residual_norms(a, res.values, res.vectors);
  if (!res.converged) res.converged = (res.residual_norms.array() <= cfg.tol).all();
  return res;
}

inline EigenResult solve(const SupraMatrix& a, Method method, const SolverConfig& cfg) {
  switch (method) {
    case Method::dense: return dense_reference(a, cfg.k, cfg.dense_max_rows);
    case Method::lanczos: return lanczos(a, cfg);
    case Method::lobpcg: return lobpcg(a, cfg);
  }
  throw Error("unknown solver");
}

// ---------------------------------------------------------------------------

struct Trajectory {
  Eigen::VectorXd values;   // K * k, iteration-major
  Eigen::MatrixXd vectors;  // rows x (K * k), block i holds iterate i
  int iterations = 0;
};

/// Concatenates the captured iterates with consistent per-eigenvector signs.
///
/// Column j of the final iterate is the anchor; walking backwards, each
/// earlier column is flipped when its inner product with the (already
/// aligned) following iterate is negative. One random sign per eigenvector
/// index, drawn from `sign_seed`, is then applied to every iterate.
inline Trajectory build_trajectory(const EigenResult& result, std::uint64_t sign_seed) {
  const auto& traj = result.trajectory;
  if (traj.empty()) throw Error("build_trajectory: empty trajectory");
  const Eigen::Index rows = traj.back().vectors.rows();
  const Eigen::Index k = traj.back().vectors.cols();
  const int K = static_cast<int>(traj.size());

  std::vector<Eigen::MatrixXd> aligned(K);
  aligned[K - 1] = traj[K - 1].vectors;
  for (int i = K - 2; i >= 0; --i) {
    if (traj[i].vectors.cols() != k || traj[i].vectors.rows() != rows)
      throw Error("build_trajectory: iterates have inconsistent shapes");
    aligned[i] = traj[i].vectors;
    for (Eigen::Index j = 0; j < k; ++j)
      if (aligned[i].col(j).dot(aligned[i + 1].col(j)) < 0) aligned[i].col(j) *= -1.0;
  }

  Rng rng(sign_seed);
  std::bernoulli_distribution coin;
  std::vector<double> sign(k);
  for (auto& s : sign) s = coin(rng) ? 1.0 : -1.0;

  Trajectory out;
  out.iterations = K;
  out.values.resize(K * k);
  out.vectors.resize(rows, K * k);
  for (int i = 0; i < K; ++i) {
    out.values.segment(i * k, k) = traj[i].values;
    for (Eigen::Index j = 0; j < k; ++j) out.vectors.col(i * k + j) = sign[j] * aligned[i].col(j);
  }
  return out;
}

}  // namespace slpe
