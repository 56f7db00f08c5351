#include <gtest/gtest.h>

#include "malkit/oracles.hpp"

using namespace malkit;

namespace {

Schedule S(const char* t) { return parse_schedule(t); }

}  // namespace

TEST(ConflictGraph, CycleIsRotatedToSmallestMember) {
  ConflictGraph g;
  g.add_edge(3, 2, ConflictKind::ww);
  g.add_edge(2, 3, ConflictKind::rw);
  g.add_node(1);
  auto c = g.find_cycle();
  ASSERT_TRUE(c);
  EXPECT_EQ(*c, (std::vector<TxnId>{2, 3}));
  EXPECT_FALSE(g.topological_order());
}

TEST(ConflictGraph, TopologicalOrderPrefersSmallIds) {
  ConflictGraph g;
  g.add_node(3);
  g.add_node(1);
  g.add_edge(2, 1, ConflictKind::wr);
  EXPECT_EQ(*g.topological_order(), (std::vector<TxnId>{2, 1, 3}));
}

TEST(ConflictPairs, KindsAndPositions) {
  auto pairs = conflict_pairs(S("r1(x)w2(x)w1(x)c1c2"));
  std::vector<ConflictPair> want{{0, 1, ConflictKind::rw}, {1, 2, ConflictKind::ww}};
  EXPECT_EQ(pairs, want);
}

TEST(Csr, SerialIsMember) {
  auto v = is_csr(S("r1(x)w1(x)c1r2(x)w2(x)c2"));
  EXPECT_TRUE(v.member);
  EXPECT_EQ(format_verdict(v), "csr member order t1,t2");
}

TEST(Csr, LostUpdateIsNot) {
  auto v = is_csr(S("r1(x)r2(x)w1(x)w2(x)c1c2"));
  EXPECT_FALSE(v.member);
  EXPECT_EQ(format_verdict(v), "csr non-member cycle t1->t2->t1");
}

TEST(Csr, AbortedTransactionsIgnored) {
  EXPECT_TRUE(is_csr(S("r1(x)r2(x)w1(x)w2(x)c1a2")).member);
}

TEST(Vsr, BlindWritesAreViewButNotConflictSerializable) {
  Schedule s = S("r1(x)w2(x)w1(x)w3(x)c1c2c3");
  EXPECT_FALSE(is_csr(s).member);
  EXPECT_TRUE(is_vsr(s).member);
}

TEST(Vsr, FinalWriteMatters) {
  // Same reads-from as t1 t2 but the final write of x differs from every
  // serial order that preserves it.
  EXPECT_FALSE(is_vsr(S("r1(x)w2(x)w1(x)c1c2")).member);
}

TEST(Vsr, BoundsEnforced) {
  EXPECT_THROW(is_vsr(S("r1(x)c1r2(x)c2r3(x)c3"), OracleBounds{2, 12}), BoundExceeded);
}

TEST(MvConflictGraph, EdgesFollowVersionOrder) {
  Schedule s = S("w1(x)c1w2(x)c2r3(x)c3");
  VersionFunction vf;
  vf.assign(4, 1);  // r3 reads the older version
  ConflictGraph g = mv_conflict_graph(s, vf);
  EXPECT_TRUE(g.has_edge(1, 3));  // reads from
  EXPECT_TRUE(g.has_edge(3, 2));  // a later version exists
  EXPECT_FALSE(g.has_edge(2, 3));
}

TEST(Mvcsr, ReadOldVersionStillMember) {
  Schedule s = S("r1(x)w2(x)w2(y)c2r1(y)c1");
  EXPECT_FALSE(is_csr(s).member);
  EXPECT_FALSE(is_mvcsr(s, committed_read_vf(s)).member);  // r1(y) sees y2
  VersionFunction old;
  old.assign(0, 0);
  EXPECT_THROW(is_mvcsr(s, old), InvalidVersionFunction);
  old.assign(4, 0);
  EXPECT_TRUE(is_mvcsr(s, old).member);
}

TEST(Mvcsr, CrossedReadsAreNot) {
  Schedule s = S("r1(x)r2(y)w1(y)w2(x)c1c2");
  EXPECT_FALSE(is_mvcsr(s, committed_read_vf(s)).member);
  EXPECT_FALSE(is_mvsr(s, committed_read_vf(s)).member);
}

TEST(Mvsr, SerialOrderWitness) {
  Schedule s = S("r1(x)w2(x)c2c1");
  auto v = is_mvsr(s, committed_read_vf(s));
  EXPECT_TRUE(v.member);
  EXPECT_EQ(v.witness, (std::vector<TxnId>{1, 2}));
}

TEST(Mvsr, VersionFunctionDecides) {
  Schedule s = S("w1(x)w1(y)c1r2(x)r2(y)c2");
  VersionFunction both;
  both.assign(3, 1);
  both.assign(4, 1);
  EXPECT_TRUE(is_mvsr(s, both).member);
  VersionFunction split = both;
  split.assign(4, 0);  // x after t1, y before it
  EXPECT_FALSE(is_mvsr(s, split).member);
  EXPECT_FALSE(is_mvsr_by_version_order(s, split).member);
}

// Independent oracle agreement on a handful of hand cases; the exhaustive
// comparison lives in the acceptance suite.
TEST(Mvsr, TwoRoutesAgree) {
  for (const char* t : {"r1(x)w2(x)c2c1", "r1(x)r2(y)w1(y)w2(x)c1c2", "w1(x)w2(x)r3(x)c1c2c3",
                        "r1(x)w1(y)c1r2(x)w2(y)r3(y)c2w3(x)c3", "r1(x)r1(y)w2(x)w2(y)w1(y)c1c2"}) {
    Schedule s = S(t);
    auto vf = committed_read_vf(s);
    EXPECT_EQ(is_mvsr(s, vf).member, is_mvsr_by_version_order(s, vf).member) << t;
  }
}

TEST(Classes, CsrImpliesVsrAndMvcsrImpliesMvsr) {
  for (const char* t : {"r1(x)w1(x)c1r2(x)w2(x)c2", "r1(x)w2(x)w1(x)w3(x)c1c2c3", "r1(x)r2(y)w1(y)c1w2(y)c2"}) {
    Schedule s = S(t);
    auto vf = committed_read_vf(s);
    if (is_csr(s).member) {
      EXPECT_TRUE(is_vsr(s).member) << t;
    }
    if (is_mvcsr(s, vf).member) {
      EXPECT_TRUE(is_mvsr(s, vf).member) << t;
    }
  }
}
