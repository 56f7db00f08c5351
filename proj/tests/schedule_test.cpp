#include <gtest/gtest.h>

#include "malkit/schedule.hpp"

using namespace malkit;

TEST(Parse, DataSteps) {
  Schedule s = parse_schedule("r1(x)w2(x)c2c1");
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0].action, Action::read);
  EXPECT_EQ(s[0].txn, 1u);
  EXPECT_EQ(s[0].item, "x");
  EXPECT_EQ(s[1].action, Action::write);
  EXPECT_EQ(s[2].action, Action::commit);
  EXPECT_EQ(s.txns(), (std::set<TxnId>{1, 2}));
}

TEST(Parse, LockSteps) {
  Schedule s = parse_schedule("wl1(a)w1(a)d1(a)rl2(a)r2(a)ru2(a)c2cl1(a)wu1(a)cu1(a)c1");
  EXPECT_EQ(s[0].action, Action::write_lock);
  EXPECT_EQ(s[2].action, Action::donate);
  EXPECT_EQ(s[3].action, Action::read_lock);
  EXPECT_EQ(s[5].action, Action::read_unlock);
  EXPECT_EQ(s[7].action, Action::certify_lock);
  EXPECT_EQ(s[9].action, Action::certify_unlock);
  EXPECT_TRUE(s.has_lock_steps());
  EXPECT_EQ(format_schedule(data_projection(s)), "w1(a)r2(a)c2c1");
}

TEST(Parse, HintsAndVersionTags) {
  Schedule s = parse_schedule("w1(x)!r2(x1)w2(y)~c1c2");
  EXPECT_TRUE(s[0].last_access);
  EXPECT_EQ(s[1].version, std::optional<TxnId>(1));
  EXPECT_TRUE(s[2].no_more_writes);
  EXPECT_EQ(format_schedule(s), "w1(x)!r2(x1)w2(y)~c1c2");
  EXPECT_EQ(format_schedule(strip_annotations(s)), "w1(x)r2(x)w2(y)c1c2");
}

TEST(Parse, SingleSpacesBetweenSteps) {
  EXPECT_EQ(parse_schedule("r1(x) w2(x)~ c2 c1"), parse_schedule("r1(x)w2(x)~c2c1"));
}

TEST(Parse, MultiLetterTransactionAndItem) {
  Schedule s = parse_schedule("r12(acct)c12");
  EXPECT_EQ(s[0].txn, 12u);
  EXPECT_EQ(s[0].item, "acct");
}

TEST(Parse, RejectsMalformedInput) {
  EXPECT_THROW(parse_schedule("q1(x)"), ParseError);
  EXPECT_THROW(parse_schedule("r0(x)"), ParseError);
  EXPECT_THROW(parse_schedule("r1x)"), ParseError);
  EXPECT_THROW(parse_schedule("r1()"), ParseError);
  EXPECT_THROW(parse_schedule("w1(x2)"), ParseError);
  EXPECT_THROW(parse_schedule("c1r1(x)"), ParseError);
  EXPECT_THROW(parse_schedule("c1c1"), ParseError);
  EXPECT_THROW(parse_schedule("rl1(x)!"), ParseError);
}

TEST(Parse, ErrorOffsetPointsAtTheBadStep) {
  try {
    parse_schedule("r1(x)q2(y)");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 5u);
  }
}

TEST(Projection, CommittedDropsAborted) {
  Schedule s = parse_schedule("r1(x)w2(x)a2c1");
  EXPECT_EQ(format_schedule(committed_projection(s)), "r1(x)c1");
  EXPECT_EQ(s.aborted(), (std::set<TxnId>{2}));
  EXPECT_EQ(s.committed(), (std::set<TxnId>{1}));
}

TEST(VersionFunctions, LastWriter) {
  Schedule s = parse_schedule("w1(x)w2(x)r3(x)c1c2c3");
  EXPECT_EQ(last_writer_vf(s).writer_at(2), std::optional<TxnId>(2));
}

TEST(VersionFunctions, CommittedReadSkipsUncommitted) {
  Schedule s = parse_schedule("w1(x)c1w2(x)r3(x)c2c3");
  EXPECT_EQ(committed_read_vf(s).writer_at(3), std::optional<TxnId>(1));
}

TEST(VersionFunctions, CommittedReadSeesOwnWrite) {
  Schedule s = parse_schedule("w1(x)r1(x)c1");
  EXPECT_EQ(committed_read_vf(s).writer_at(1), std::optional<TxnId>(1));
}

TEST(VersionFunctions, TagsOverrideFallback) {
  Schedule s = parse_schedule("w1(x)c1w2(x)c2r3(x1)c3");
  VersionFunction vf = tagged_vf(s, last_writer_vf(s));
  EXPECT_EQ(vf.writer_at(4), std::optional<TxnId>(1));
}

TEST(VersionFunctions, ValidateRejectsFutureVersion) {
  Schedule s = parse_schedule("r1(x)w2(x)c1c2");
  VersionFunction vf;
  vf.assign(0, 2);
  EXPECT_THROW(validate(s, vf), InvalidVersionFunction);
  vf.assign(0, 0);
  EXPECT_NO_THROW(validate(s, vf));
}

TEST(ReadsFrom, MonoversionAndMultiversion) {
  Schedule s = parse_schedule("w1(x)c1w2(x)r3(x)c2c3");
  EXPECT_TRUE(reads_from(s).count({3, "x", 2}));
  EXPECT_TRUE(reads_from(s, committed_read_vf(s)).count({3, "x", 1}));
}
