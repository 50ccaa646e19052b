#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "slpe/bench.hpp"
#include "slpe/encodings.hpp"

using namespace slpe;

namespace {

TemporalGraph two_layer_edge() {
  return make_temporal_graph(std::vector<std::vector<Edge>>{{{0, 1, 1.0}}, {{0, 1, 1.0}}}, 2);
}

PeOptions options(int k, bool global = true) {
  PeOptions o;
  o.solver.k = k;
  o.solver.seed = 17;
  o.global_nodes = global;
  return o;
}

std::string serialize(const PETable& t) {
  std::ostringstream out;
  write_pe(out, t);
  return out.str();
}

}  // namespace

TEST(Slpe, AnalyticTwoLayerKernel) {
  const auto t = compute_slpe(two_layer_edge(), {0, 2}, Variant::exact, options(1, false));
  ASSERT_EQ(t.entries.size(), 4u);
  const double first = t.entries.begin()->second[0];
  for (const auto& [key, v] : t.entries) {
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NEAR(std::abs(v[0]), 0.5, 1e-10);
    EXPECT_NEAR(v[0], first, 1e-10);
  }
}

TEST(Slpe, ScatterIsAnExactCopyOfEigenvectorRows) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 15; ++trial) {
    const auto g = oracle::random_graph(rng, 6 + trial % 5, 1 + trial % 4, 0.35);
    for (Variant v : {Variant::exact, Variant::inexact}) {
      PeOptions o = options(3);
      o.keep_global = trial % 2;
      const Window w{0, g.num_snapshots()};
      SlpeRun run;
      try {
        run = compute_slpe_run(g, w, v, o);
      } catch (const Error&) {
        continue;  // edgeless draw
      }
      const auto& map = run.laplacian.index_map();
      std::size_t expected = 0;
      for (int r = 0; r < map.size(); ++r) {
        const auto [t, node] = map.entries[r];
        const auto* row = run.table.find(w.start + t, node);
        if (run.windowed.is_global_id(node) && !o.keep_global) {
          EXPECT_EQ(row, nullptr);
          continue;
        }
        ++expected;
        ASSERT_NE(row, nullptr);
        for (int j = 0; j < run.encoded.pairs; ++j) EXPECT_EQ((*row)[j], run.encoded.eigen.vectors(r, j));
      }
      EXPECT_EQ(run.table.entries.size(), expected);
    }
  }
}

TEST(Slpe, KeysAreActiveNodesOfTheWindow) {
  const auto g = make_temporal_graph(std::vector<std::vector<Edge>>{{{0, 1, 1.0}}, {{1, 2, 1.0}}, {{2, 3, 1.0}}}, 4);
  const auto t = compute_slpe(g, {1, 2}, Variant::exact, options(2));
  EXPECT_EQ(t.find(1, 0), nullptr);  // node 0 inactive at t = 1
  EXPECT_NE(t.find(1, 1), nullptr);
  EXPECT_NE(t.find(2, 3), nullptr);  // absolute time index
  EXPECT_EQ(t.find(0, 0), nullptr);  // outside the window
  EXPECT_EQ(t.entries.size(), 4u);
}

TEST(Slpe, EigenvaluesAppendedIdenticallyEverywhere) {
  auto o = options(3);
  o.include_eigenvalues = true;
  const auto t = compute_slpe(generate_ba_temporal(30, 2, 3, 1), {0, 3}, Variant::exact, o);
  EXPECT_EQ(t.c, 6);
  const auto& ref = t.entries.begin()->second;
  for (const auto& [key, v] : t.entries) {
    ASSERT_EQ(v.size(), 6u);
    for (int j = 3; j < 6; ++j) EXPECT_EQ(v[j], ref[j]);
  }
  EXPECT_NEAR(ref[3], 0.0, 1e-8);
}

TEST(Slpe, TrajectoryWidthIsKTimesK) {
  auto o = options(2);
  o.solver.maxiter = 7;
  const auto t = compute_slpe(generate_ba_temporal(40, 2, 3, 2), {0, 3}, Variant::trajectory, o);
  EXPECT_EQ(t.c, 14);
  for (const auto& [key, v] : t.entries) EXPECT_EQ(v.size(), 14u);
  o.include_eigenvalues = true;
  EXPECT_EQ(compute_slpe(generate_ba_temporal(40, 2, 3, 2), {0, 3}, Variant::trajectory, o).c, 28);
}

TEST(Slpe, EdgelessWindowIsAnError) {
  const auto g = make_temporal_graph(std::vector<std::vector<Edge>>{{}, {}}, 3);
  EXPECT_THROW(compute_slpe(g, {0, 2}, Variant::exact, options(1, false)), Error);
}

TEST(Slpe, NoCouplingsMeansUnionOfLayerSpectra) {
  // disjoint node sets per layer, so the reduced supra-graph has no couplings
  const auto g = make_temporal_graph(
      std::vector<std::vector<Edge>>{{{0, 1, 1.0}, {1, 2, 1.0}}, {{3, 4, 1.0}, {4, 5, 1.0}, {3, 5, 1.0}}}, 6);
  auto o = options(5, false);
  const auto run = compute_slpe_run(g, {0, 2}, Variant::exact, o);
  std::vector<double> expect;
  for (const auto& l : layer_laplacians(g)) {
    const auto e = oracle::jacobi(l.to_dense());
    expect.insert(expect.end(), e.values.data(), e.values.data() + e.values.size());
  }
  std::sort(expect.begin(), expect.end());
  for (int j = 0; j < 5; ++j) EXPECT_NEAR(run.encoded.eigen.values[j], expect[j], 1e-8);
}

TEST(Slpe, DropTrivialKeepsWidthK) {
  auto o = options(3);
  o.drop_trivial = true;
  o.include_eigenvalues = true;
  const auto t = compute_slpe(generate_ba_temporal(30, 2, 2, 3), {0, 2}, Variant::exact, o);
  for (const auto& [key, v] : t.entries) {
    ASSERT_EQ(v.size(), 6u);
    EXPECT_GT(v[3], 1e-10);
  }
}

TEST(Slpe, ByteIdenticalReruns) {
  const auto g = generate_ba_temporal(50, 2, 4, 8);
  for (const char* name : {"slpe-e", "slpe-i", "slpe-t", "lpe-e", "lpe-i", "lpe-t"}) {
    auto o = options(3);
    o.solver.maxiter = 5;
    const auto v = PeVariant::parse(name);
    EXPECT_EQ(serialize(compute_pe(g, {1, 3}, v, o)), serialize(compute_pe(g, {1, 3}, v, o))) << name;
  }
}

TEST(Lpe, SingleLayerEqualsSlpeUpToColumnSign) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = oracle::random_graph(rng, 12, 1, 0.4);
    auto o = options(3);
    PETable s, l;
    try {
      s = compute_slpe(g, {0, 1}, Variant::exact, o);
      l = compute_lpe(g, {0, 1}, Variant::exact, o);
    } catch (const Error&) {
      continue;
    }
    // only compare columns whose eigenvalue is simple
    const auto run = compute_slpe_run(g, {0, 1}, Variant::exact, o);
    const auto all = oracle::jacobi(run.laplacian.to_dense()).values;
    ASSERT_EQ(s.entries.size(), l.entries.size());
    for (int j = 0; j < 3; ++j) {
      const bool simple = (j == 0 || all[j] - all[j - 1] > 1e-6) && all[j + 1] - all[j] > 1e-6;
      if (!simple) continue;
      double sign = 0;
      for (const auto& [key, v] : s.entries) {
        const double w = l.entries.at(key)[j];
        if (sign == 0 && std::abs(v[j]) > 1e-6) sign = w / v[j] > 0 ? 1 : -1;
        EXPECT_NEAR(w, sign * v[j], 1e-7);
      }
    }
  }
}

TEST(Lpe, SmallLayersArePaddedAndFlagged) {
  const auto g = make_temporal_graph(std::vector<std::vector<Edge>>{{{0, 1, 1.0}, {1, 2, 1.0}}}, 3);
  auto o = options(8, false);
  const auto t = compute_lpe(g, {0, 1}, Variant::exact, o);
  EXPECT_TRUE(t.padded);
  for (const auto& [key, v] : t.entries) {
    ASSERT_EQ(v.size(), 8u);
    for (int j = 3; j < 8; ++j) EXPECT_EQ(v[j], 0.0);
  }
  EXPECT_TRUE(compute_lpe(g, {0, 1}, Variant::inexact, o).padded);
}

TEST(Lpe, IdenticalLayersHaveIdenticalEigenvalues) {
  const auto layer = generate_ba_temporal(25, 2, 1, 4).snapshots[0].edges;
  const auto g = make_temporal_graph(std::vector<std::vector<Edge>>{layer, layer}, 25);
  auto o = options(4);
  o.include_eigenvalues = true;
  const auto t = compute_lpe(g, {0, 2}, Variant::exact, o);
  const auto& a = t.entries.at({0, 0});
  const auto& b = t.entries.at({1, 0});
  for (int j = 4; j < 8; ++j) EXPECT_NEAR(a[j], b[j], 1e-9);
}

TEST(Lpe, ThreadCountDoesNotChangeOutput) {
  const auto g = generate_ba_temporal(40, 2, 5, 6);
  auto o = options(3);
  EXPECT_EQ(serialize(compute_lpe(g, {0, 5}, Variant::inexact, o, 1)),
            serialize(compute_lpe(g, {0, 5}, Variant::inexact, o, 4)));
}

TEST(Concat, ShapesAndPadding) {
  PETable pe;
  pe.c = 3;
  pe.k = 3;
  pe.entries[{2, 0}] = {1, 2, 3};
  FeatureMap f{{0, {9, 8}}, {1, {7, 6}}};
  auto out = concat_features(f, pe, 2, false);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.at(0), (std::vector<double>{9, 8, 1, 2, 3}));
  out = concat_features(f, pe, 2, true);
  EXPECT_EQ(out.at(1), (std::vector<double>{7, 6, 0, 0, 0}));

  PETable empty;
  empty.c = 3;
  out = concat_features(f, empty, 0, true);
  EXPECT_EQ(out.at(0), (std::vector<double>{9, 8, 0, 0, 0}));

  pe.entries[{2, 5}] = {1, 1, 1};
  try {
    concat_features(f, pe, 2, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("missing feature row"), std::string::npos);
  }
  FeatureMap ragged{{0, {1}}, {1, {1, 2}}};
  EXPECT_THROW(concat_features(ragged, empty, 0, true), Error);
}

TEST(PeFile, RoundTripIsExact) {
  auto o = options(3);
  o.include_eigenvalues = true;
  const auto t = compute_slpe(generate_ba_temporal(30, 2, 3, 2), {0, 3}, Variant::inexact, o);
  const std::string text = serialize(t);
  EXPECT_EQ(text.substr(0, text.find('\n')), "#pe variant=slpe-i k=3 c=6 window=0,3 seed=17");
  std::istringstream in(text);
  const auto back = read_pe(in);
  EXPECT_EQ(back.entries, t.entries);
  EXPECT_EQ(back.variant, t.variant);
  EXPECT_EQ(back.c, 6);
  EXPECT_TRUE(back.include_eigenvalues);
  EXPECT_EQ(serialize(back), text);
  std::istringstream bad("#pe variant=slpe-i k=1 c=1 window=0,1 seed=0\n0 0 1 2\n");
  EXPECT_THROW(read_pe(bad), ParseError);
}

TEST(PeVariant, Parsing) {
  EXPECT_EQ(PeVariant::parse("SLPE-T").str(), "slpe-t");
  EXPECT_EQ(PeVariant::parse("lpe-i").kind, PeKind::lpe);
  EXPECT_THROW(PeVariant::parse("slpe"), Error);
  EXPECT_THROW(PeVariant::parse("rwpe-e"), Error);
}
