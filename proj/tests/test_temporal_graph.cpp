#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "slpe/temporal_graph.hpp"

using namespace slpe;

namespace {

TemporalGraph from_text(const std::string& text, IngestOptions opt = {}) {
  std::istringstream in(text);
  return ingest_edge_list(in, opt);
}

TemporalGraph chain(int T) {
  std::vector<std::vector<Edge>> layers;
  for (int t = 0; t < T; ++t) layers.push_back({{t % 3, t % 3 + 1, 1.0}});
  return make_temporal_graph(layers, 4);
}

}  // namespace

TEST(Ingest, EmptyFileIsRejected) {
  try {
    from_text("");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("empty file"), std::string::npos);
  }
  EXPECT_THROW(from_text("# only a comment\n\n"), Error);
}

TEST(Ingest, DuplicatePairsMergeBySummingWeights) {
  const auto g = from_text("0 1 5\n1 0 5\n1 2 5\n");
  ASSERT_EQ(g.num_snapshots(), 1);
  ASSERT_EQ(g.snapshots[0].edges.size(), 2u);
  EXPECT_EQ(g.snapshots[0].edges[0].u, 0);
  EXPECT_EQ(g.snapshots[0].edges[0].v, 1);
  EXPECT_DOUBLE_EQ(g.snapshots[0].edges[0].weight, 2.0);
  EXPECT_DOUBLE_EQ(g.snapshots[0].edges[1].weight, 1.0);
}

TEST(Ingest, ParseErrorsCarryLineNumbers) {
  try {
    from_text("0 1 0\n0 x 1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(from_text("0 -1 0\n"), Error);
  EXPECT_THROW(from_text("2 2 0\n"), Error);
  IngestOptions loops;
  loops.allow_self_loops = true;
  EXPECT_EQ(from_text("2 2 0\n0 2 0\n", loops).snapshots[0].edges.size(), 2u);
}

TEST(Ingest, DistinctTimestampsBecomeOrderedSnapshots) {
  const auto g = from_text("# comment\n0,1,30\n1,2,10\n2,3,20.5\n3 4 10\n");
  ASSERT_EQ(g.num_snapshots(), 3);
  EXPECT_EQ(g.snapshots[0].edges.size(), 2u);  // t=10
  EXPECT_EQ(g.snapshots[2].edges.size(), 1u);  // t=30
  EXPECT_EQ(g.universe_size, 5);
  g.validate();
}

TEST(Ingest, FixedBucketsSplitTheTimestampRange) {
  IngestOptions opt;
  opt.partition = Partition::parse("fixed:2");
  const auto g = from_text("0 1 0\n1 2 4\n2 3 6\n3 4 10\n", opt);
  ASSERT_EQ(g.num_snapshots(), 2);
  EXPECT_EQ(g.snapshots[0].edges.size(), 2u);
  EXPECT_EQ(g.snapshots[1].edges.size(), 2u);
  EXPECT_THROW(Partition::parse("fixed:0"), Error);
  EXPECT_THROW(Partition::parse("weekly"), Error);
}

TEST(Ingest, SparseIdsAreRemappedDensely) {
  const auto g = from_text("10 500 1\n500 7000 1\n");
  EXPECT_EQ(g.universe_size, 3);
  ASSERT_EQ(g.original_ids.size(), 3u);
  EXPECT_EQ(g.original_ids[0], 10);
  EXPECT_EQ(g.original_ids[2], 7000);
}

TEST(Ingest, CanonicalRoundTrip) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = oracle::random_graph(rng, 9, 4, 0.3);
    // give a few edges non-unit weights
    for (auto& s : g.snapshots)
      for (std::size_t i = 0; i < s.edges.size(); i += 3) s.edges[i].weight = 0.1 * (i + 1);
    std::ostringstream out;
    write_edge_list(out, g);
    const auto back = from_text(out.str());
    EXPECT_EQ(back.universe_size, g.universe_size);
    ASSERT_EQ(back.num_snapshots(), g.num_snapshots()) << out.str();
    for (int t = 0; t < g.num_snapshots(); ++t) EXPECT_EQ(back.snapshots[t], g.snapshots[t]);
  }
}

TEST(Snapshot, ActiveNodesAreEdgeEndpoints) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_graph(rng, 8, 3, 0.2);
    for (const auto& s : g.snapshots) {
      std::set<NodeId> ends;
      for (const auto& e : s.edges) ends.insert(e.u), ends.insert(e.v);
      EXPECT_EQ(std::vector<NodeId>(ends.begin(), ends.end()), s.active_nodes);
    }
  }
}

TEST(Slice, ReindexesAndPreservesUniverse) {
  const auto g = chain(14);
  const auto s = slice(g, {9, 5});
  ASSERT_EQ(s.num_snapshots(), 5);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(s.snapshots[i].t, i);
    EXPECT_EQ(s.snapshots[i].edges, g.snapshots[9 + i].edges);
  }
  EXPECT_EQ(s.universe_size, g.universe_size);
  EXPECT_TRUE(slice(g, {0, 14}).same_structure(g));
  EXPECT_THROW(slice(g, {0, 15}), Error);
  EXPECT_THROW(slice(g, {3, 0}), Error);
}

TEST(Slice, CompositionMatchesSingleSlice) {
  const auto g = chain(12);
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 3; ++b)
      EXPECT_TRUE(slice(slice(g, {a, 6}), {b, 3}).same_structure(slice(g, {a + b, 3})));
}

TEST(Split, FloorBoundaries) {
  auto lengths = [](int T) {
    const auto s = chronological_split(chain(T), 0.70, 0.15);
    return std::vector<int>{s.train.num_snapshots(), s.validation.num_snapshots(), s.test.num_snapshots()};
  };
  EXPECT_EQ(lengths(14), (std::vector<int>{9, 2, 3}));
  EXPECT_EQ(lengths(10), (std::vector<int>{7, 1, 2}));
  try {
    lengths(3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "empty validation segment");
  }
  EXPECT_THROW(chronological_split(chain(10), 0.7, 0.4), Error);
}
