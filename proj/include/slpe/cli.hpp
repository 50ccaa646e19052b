#pragma once

// Subcommand dispatcher behind the `slpe` binary.
// Exit codes: 0 ok, 1 "distinguished" (wl-test), 2 usage errors, 3 runtime failures.

#include <CLI11.hpp>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "slpe/bench.hpp"
#include "slpe/common.hpp"
#include "slpe/eigensolve.hpp"
#include "slpe/encodings.hpp"
#include "slpe/smoothness.hpp"
#include "slpe/supra.hpp"
#include "slpe/temporal_graph.hpp"
#include "slpe/wl.hpp"

namespace slpe::cli {

enum ExitCode { ok = 0, distinguished = 1, usage = 2, failure = 3 };

/// Thrown for invalid flag values found after parsing (exit code 2).
struct UsageError : Error {
  using Error::Error;
};

struct RunConfig {
  std::uint64_t seed = 0;
  double mu = 1.0;
  int k = 8;
  std::string window = "3";  // "<len>" for the most recent snapshots, or "<start>,<len>"
  int maxiter = 20;
  double tol = 1e-8;
  std::string variant = "slpe-e";
  std::string out;  // empty or "-" = standard output
  std::string log = "quiet";
};

inline void add_global_flags(CLI::App* app, RunConfig& rc) {
  app->add_option("--seed", rc.seed, "Master random seed")->capture_default_str();
  app->add_option("--mu", rc.mu, "Inter-layer coupling weight")->capture_default_str();
  app->add_option("--k", rc.k, "Number of eigenpairs")->capture_default_str();
  app->add_option("--window", rc.window, "Window: <len> (most recent) or <start>,<len>")->capture_default_str();
  app->add_option("--maxiter", rc.maxiter, "Iteration cap for inexact solves")->capture_default_str();
  app->add_option("--tol", rc.tol, "Residual tolerance")->capture_default_str();
  app->add_option("--variant", rc.variant, "slpe-e|slpe-i|slpe-t|lpe-e|lpe-i|lpe-t")->capture_default_str();
  app->add_option("--out", rc.out, "Output path (default: standard output)");
  app->add_option("--log", rc.log, "quiet|info|debug")
      ->check(CLI::IsMember({"quiet", "info", "debug"}))
      ->capture_default_str();
}

inline Window parse_window(const std::string& text, const TemporalGraph& g) {
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) return last_window(g, std::stoi(text));
    return {std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
  } catch (const std::logic_error&) {
    throw UsageError("invalid --window '" + text + "'");
  }
}

inline void check_window_syntax(const std::string& text) {
  const auto comma = text.find(',');
  auto is_int = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
  };
  const bool valid = comma == std::string::npos ? is_int(text) && std::stoi(text) >= 1
                                                : is_int(text.substr(0, comma)) && is_int(text.substr(comma + 1)) &&
                                                      std::stoi(text.substr(comma + 1)) >= 1;
  if (!valid) throw UsageError("invalid --window '" + text + "', expected <len> or <start>,<len>");
}

inline void check_common(const RunConfig& rc) {
  if (rc.k < 1) throw UsageError("--k must be at least 1");
  if (rc.maxiter < 1) throw UsageError("--maxiter must be at least 1");
  if (!(rc.tol > 0)) throw UsageError("--tol must be positive");
  if (!(rc.mu > 0)) throw UsageError("--mu must be positive");
}

/// Writes through `fn` to the --out file, or to `fallback` when none was given.
inline void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  fn(f);
  if (!f) throw Error("write to '" + path + "' failed");
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

/// `node f_1 ... f_d` lines; `#` comments allowed.
inline FeatureMap read_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open feature file '" + path + "'");
  FeatureMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto f = detail::split_fields(line);
    NodeId v = 0;
    if (f.empty() || !detail::parse_int(f[0], v)) throw ParseError("bad node id in feature file", lineno);
    std::vector<double> row(f.size() - 1);
    for (std::size_t j = 1; j < f.size(); ++j)
      if (!detail::parse_real(f[j], row[j - 1])) throw ParseError("bad feature value", lineno);
    out[v] = std::move(row);
  }
  return out;
}

inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Supra-Laplacian positional encodings for discrete-time dynamic graphs", "slpe"};
  app.require_subcommand(1);
  RunConfig rc;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Read a temporal edge list and report its statistics");
  std::string in_path, partition = "distinct", canonical_out;
  bool allow_loops = false;
  ingest->add_option("--in", in_path, "Edge list (u v t [w])")->required();
  ingest->add_option("--partition", partition, "Snapshot partition: distinct or fixed:N")->capture_default_str();
  ingest->add_flag("--allow-self-loops", allow_loops, "Keep self-loops instead of rejecting them");
  ingest->add_option("--canonical", canonical_out, "Also write the canonical edge list here");
  add_global_flags(ingest, rc);

  // build-supra
  auto* build = app.add_subcommand("build-supra", "Export the supra-adjacency or supra-Laplacian of a window");
  std::string kind = "laplacian", map_out;
  bool full = false, global = false, weights = false, whole = false;
  build->add_option("--in", in_path, "Edge list")->required();
  build->add_option("--partition", partition, "Snapshot partition: distinct or fixed:N")->capture_default_str();
  build->add_option("--kind", kind, "adjacency|laplacian")
      ->check(CLI::IsMember({"adjacency", "laplacian"}))
      ->capture_default_str();
  build->add_flag("--full", full, "Keep rows of inactive nodes (no isolated-node removal)");
  build->add_flag("--global-nodes", global, "Add one global node per snapshot");
  build->add_flag("--use-weights", weights, "Use edge weights instead of unit weights");
  build->add_flag("--all-snapshots", whole, "Ignore --window and use every snapshot");
  build->add_option("--map", map_out, "Write the supra row index map here");
  add_global_flags(build, rc);

  // compute-pe
  auto* pe = app.add_subcommand("compute-pe", "Compute a positional-encoding table");
  bool include_eig = false, drop_trivial = false, keep_global = false, no_global = false, pad_missing = false;
  int stride = 1, exact_maxiter = 10000, at_t = -1;
  std::string init = "normal", features_path, features_out;
  pe->add_option("--in", in_path, "Edge list")->required();
  pe->add_option("--partition", partition, "Snapshot partition: distinct or fixed:N")->capture_default_str();
  pe->add_flag("--include-eigenvalues", include_eig, "Append the k eigenvalues to every vector");
  pe->add_flag("--drop-trivial", drop_trivial, "Discard eigenpairs with eigenvalue below 1e-10");
  pe->add_flag("--keep-global", keep_global, "Keep global-node rows in the table");
  pe->add_flag("--no-global-nodes", no_global, "Do not add global nodes");
  pe->add_flag("--use-weights", weights, "Use edge weights instead of unit weights");
  pe->add_option("--stride", stride, "Trajectory capture stride")->capture_default_str();
  pe->add_option("--exact-maxiter", exact_maxiter, "Restart-cycle cap for exact solves")->capture_default_str();
  pe->add_option("--init", init, "normal|rademacher|uniform")
      ->check(CLI::IsMember({"normal", "rademacher", "uniform"}))
      ->capture_default_str();
  pe->add_option("--features", features_path, "Node features (node f_1 ... f_d) to concatenate with the PE");
  pe->add_option("--at", at_t, "Time step for --features (default: last snapshot of the window)");
  pe->add_option("--features-out", features_out, "Where to write the concatenated features");
  pe->add_flag("--pad-missing", pad_missing, "Zero PE for featured nodes without an entry");
  add_global_flags(pe, rc);

  // wl-test
  auto* wl = app.add_subcommand("wl-test", "Compare two temporal graphs by color refinement");
  std::string g1_path, g2_path, mode = "supra";
  bool builtin = false, reduced = false;
  int max_rounds = 64;
  wl->add_option("--g1", g1_path, "First edge list");
  wl->add_option("--g2", g2_path, "Second edge list");
  wl->add_flag("--builtin", builtin, "Use the built-in counterexample pair");
  wl->add_option("--mode", mode, "supra|layer")->check(CLI::IsMember({"supra", "layer"}))->capture_default_str();
  wl->add_flag("--reduced", reduced, "Supra mode: color only active (node, t) pairs");
  wl->add_option("--max-rounds", max_rounds, "Refinement round cap")->capture_default_str();
  wl->add_option("--partition", partition, "Snapshot partition: distinct or fixed:N")->capture_default_str();
  add_global_flags(wl, rc);

  // smoothness
  auto* sm = app.add_subcommand("smoothness", "Evaluate the temporal smoothness objective");
  bool demo = false;
  int trials = 200, path_length = 8, layers = 4, column = 1;
  std::string csv_out;
  sm->add_option("--in", in_path, "Edge list (omit with --demo)");
  sm->add_option("--partition", partition, "Snapshot partition: distinct or fixed:N")->capture_default_str();
  sm->add_option("--trials", trials, "Random orthonormal trials for the minimality check")->capture_default_str();
  sm->add_flag("--demo", demo, "Coupled vs uncoupled eigenvectors on stacked path graphs");
  sm->add_option("--path-length", path_length, "Demo path length")->capture_default_str();
  sm->add_option("--layers", layers, "Demo number of layers")->capture_default_str();
  sm->add_option("--column", column, "Demo eigenvector index written to the CSV")->capture_default_str();
  sm->add_option("--csv", csv_out, "Demo CSV path (t,component,coupled_value,uncoupled_value)");
  add_global_flags(sm, rc);

  // bench
  auto* bench = app.add_subcommand("bench", "Time eigensolvers on Barabasi-Albert temporal graphs");
  std::string sizes = "1000,5000,20000,50000", solvers = "lanczos,lobpcg", target = "supra", speedup_out;
  int T = 3, ba_m = 3, repeats = 5, dense_rows = 5000;
  bool no_warmup = false;
  bench->add_option("--sizes", sizes, "Comma-separated node counts")->capture_default_str();
  bench->add_option("--solvers", solvers, "Comma-separated subset of dense,lanczos,lobpcg")->capture_default_str();
  bench->add_option("--target", target, "supra|single")->check(CLI::IsMember({"supra", "single"}))->capture_default_str();
  bench->add_option("--T", T, "Layers per supra instance")->capture_default_str();
  bench->add_option("--m", ba_m, "Preferential-attachment edges per new node")->capture_default_str();
  bench->add_option("--repeats", repeats, "Timed repetitions")->capture_default_str();
  bench->add_flag("--no-warmup", no_warmup, "Skip the untimed warm-up solve");
  bench->add_option("--dense-max-rows", dense_rows, "Largest matrix the dense solver accepts")->capture_default_str();
  bench->add_option("--speedup", speedup_out, "Write the size,lanczos_ms,lobpcg_ms,speedup table here");
  add_global_flags(bench, rc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    if (argc <= 1) err << app.help();
    return usage;
  }

  log_level() = rc.log == "debug" ? LogLevel::debug : rc.log == "info" ? LogLevel::info : LogLevel::quiet;

  // Stage 1: flag validation, before any input is read.
  std::function<int()> job;
  try {
    check_common(rc);
    IngestOptions iopt;
    iopt.partition = Partition::parse(partition);
    iopt.allow_self_loops = allow_loops;

    if (ingest->parsed()) {
      job = [&, iopt] {
        const TemporalGraph g = ingest_edge_list(in_path, iopt);
        std::size_t edges = 0;
        for (const auto& s : g.snapshots) edges += s.edges.size();
        nlohmann::ordered_json j;
        j["name"] = g.name;
        j["nodes"] = g.universe_size;
        j["snapshots"] = g.num_snapshots();
        j["edges"] = edges;
        emit(rc.out, out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
        if (!canonical_out.empty()) emit(canonical_out, out, [&](std::ostream& o) { write_edge_list(o, g); });
        return ok;
      };
    } else if (build->parsed()) {
      if (!whole) check_window_syntax(rc.window);
      job = [&, iopt] {
        TemporalGraph g = ingest_edge_list(in_path, iopt);
        if (!whole) g = slice(g, parse_window(rc.window, g));
        if (global) g = add_global_nodes(g);
        const SupraOptions so{rc.mu, !full, weights};
        const SupraMatrix m = kind == "laplacian" ? build_supra_laplacian(g, so) : build_supra_adjacency(g, so);
        emit(rc.out, out, [&](std::ostream& o) { write_matrix(o, m); });
        if (!map_out.empty()) emit(map_out, out, [&](std::ostream& o) { write_index_map(o, m.index_map()); });
        return ok;
      };
    } else if (pe->parsed()) {
      check_window_syntax(rc.window);
      const PeVariant variant = PeVariant::parse(rc.variant);
      PeOptions opt;
      opt.solver.k = rc.k;
      opt.solver.tol = rc.tol;
      opt.solver.maxiter = rc.maxiter;
      opt.solver.seed = rc.seed;
      opt.solver.init = parse_init(init);
      opt.solver.trajectory_stride = stride;
      opt.solver.validate();
      if (exact_maxiter < 1) throw UsageError("--exact-maxiter must be at least 1");
      if (!features_out.empty() && features_path.empty()) throw UsageError("--features-out requires --features");
      opt.exact_maxiter = exact_maxiter;
      opt.mu = rc.mu;
      opt.global_nodes = !no_global;
      opt.keep_global = keep_global;
      opt.include_eigenvalues = include_eig;
      opt.drop_trivial = drop_trivial;
      opt.use_weights = weights;
      job = [&, iopt, variant, opt] {
        const TemporalGraph g = ingest_edge_list(in_path, iopt);
        const Window w = parse_window(rc.window, g);
        const PETable table = compute_pe(g, w, variant, opt);
        for (const auto& msg : table.warnings) log_warning(msg);
        if (table.padded) log_warning("some layers had fewer than k eigenpairs; zero columns were padded");
        emit(rc.out, out, [&](std::ostream& o) { write_pe(o, table); });
        if (!features_path.empty()) {
          const int t = at_t >= 0 ? at_t : w.start + w.length - 1;
          const FeatureMap joined = concat_features(read_features(features_path), table, t, pad_missing);
          emit(features_out, out, [&](std::ostream& o) {
            for (const auto& [v, row] : joined) {
              o << v;
              for (double x : row) o << ' ' << format_real(x);
              o << '\n';
            }
          });
        }
        return ok;
      };
    } else if (wl->parsed()) {
      if (!builtin && (g1_path.empty() || g2_path.empty())) throw UsageError("wl-test needs --g1 and --g2, or --builtin");
      WlConfig cfg;
      cfg.mode = parse_wl_mode(mode);
      cfg.max_rounds = max_rounds;
      cfg.reduced = reduced;
      cfg.validate();
      job = [&, iopt, cfg] {
        TemporalGraph g1, g2;
        if (builtin) std::tie(g1, g2) = generate_counterexample();
        else {
          g1 = ingest_edge_list(g1_path, iopt);
          g2 = ingest_edge_list(g2_path, iopt);
        }
        const Distinction d = distinguish(g1, g2, cfg);
        nlohmann::ordered_json j;
        j["mode"] = to_string(cfg.mode);
        j["result"] = d.distinguished ? "distinguished" : "inconclusive";
        j["round"] = d.round;
        j["reason"] = d.reason;
        j["rounds"] = nlohmann::json::array();
        for (const auto& r : d.transcript)
          j["rounds"].push_back({{"round", r.round},
                                 {"colors_g1", r.classes_g1},
                                 {"colors_g2", r.classes_g2},
                                 {"fingerprints_equal", r.fingerprints_equal}});
        emit(rc.out, out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
        return d.distinguished ? distinguished : ok;
      };
    } else if (sm->parsed()) {
      if (demo) {
        if (path_length < 2 || layers < 2) throw UsageError("--path-length and --layers must be at least 2");
        if (rc.k > path_length) throw UsageError("--k exceeds --path-length");
        if (column < 0 || column >= rc.k) throw UsageError("--column must lie in [0, k)");
      } else {
        if (in_path.empty()) throw UsageError("smoothness needs --in or --demo");
        if (trials < 0) throw UsageError("--trials must be non-negative");
        check_window_syntax(rc.window);
      }
      job = [&, iopt] {
        nlohmann::ordered_json j;
        if (demo) {
          const ConsistencyDemo d = inter_layer_consistency_demo(path_length, layers, rc.mu, rc.k);
          j["coupled_total"] = d.coupled_report.total;
          j["uncoupled_total"] = d.uncoupled_report.total;
          j["coupled_inter"] = d.coupled_inter;
          j["uncoupled_inter"] = d.uncoupled_inter;
          if (!csv_out.empty()) emit(csv_out, out, [&](std::ostream& o) { write_consistency_csv(o, d, column); });
        } else {
          TemporalGraph g = ingest_edge_list(in_path, iopt);
          g = slice(g, parse_window(rc.window, g));
          const SupraOptions fo{rc.mu, false, false};
          const auto ls = layer_laplacians(g, fo);
          const SupraMatrix supra = build_supra_laplacian(g, fo);
          if (rc.k > supra.rows()) throw Error("k exceeds the number of supra rows");
          const EigenResult eig = dense_reference(supra, rc.k, std::max(5000, supra.rows()));
          const SmoothnessReport r = evaluate_objective(ls, supra, split_blocks(eig.vectors, g.num_snapshots()), rc.mu);
          const MinimalityReport mr = check_minimality(supra, rc.k, trials, rc.seed);
          j["intra"] = r.intra;
          j["inter"] = r.inter;
          j["total"] = r.total;
          j["quad_form"] = r.quad_form;
          j["identity_gap"] = r.identity_gap;
          j["eigenvalue_sum"] = eig.values.sum();
          j["trials"] = mr.trials;
          j["violations"] = mr.violations;
          if (mr.trials > 0) {
            j["min_random"] = mr.min_random;
            j["median_random"] = mr.median_random;
          }
        }
        emit(rc.out, out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
        return ok;
      };
    } else if (bench->parsed()) {
      BenchSpec spec;
      spec.sizes.clear();
      try {
        for (const auto& s : split_list(sizes)) spec.sizes.push_back(std::stoll(s));
      } catch (const std::logic_error&) {
        throw UsageError("invalid --sizes '" + sizes + "'");
      }
      spec.solvers.clear();
      for (const auto& s : split_list(solvers)) spec.solvers.push_back(parse_method(s));
      spec.T = T;
      spec.ba_m = ba_m;
      spec.k = rc.k;
      spec.repeats = repeats;
      spec.warmup = !no_warmup;
      spec.mu = rc.mu;
      spec.seed = rc.seed;
      SolverConfig lob;
      lob.k = rc.k;
      lob.maxiter = rc.maxiter;
      lob.tol = rc.tol;
      lob.seed = rc.seed;
      SolverConfig lz = SolverConfig::exact(rc.k, rc.seed);
      lz.tol = rc.tol;
      SolverConfig dn = lz;
      dn.dense_max_rows = dense_rows;
      spec.solver_cfgs = {{Method::lobpcg, lob}, {Method::lanczos, lz}, {Method::dense, dn}};
      if (T < 1) throw UsageError("--T must be at least 1");
      spec.validate();
      const BenchTarget tgt = parse_bench_target(target);
      job = [&, spec, tgt] {
        const BenchReport r = run_bench(spec, tgt);
        emit(rc.out, out, [&](std::ostream& o) { write_bench_csv(o, r); });
        if (!speedup_out.empty()) emit(speedup_out, out, [&](std::ostream& o) { write_speedup_table(o, r); });
        return ok;
      };
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  }

  // Stage 2: the work itself.
  try {
    return job();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return failure;
  }
}

}  // namespace slpe::cli
