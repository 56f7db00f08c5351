#include <gtest/gtest.h>

#include "malkit/lock_engine.hpp"

using namespace malkit;

namespace {
constexpr auto R = LockMode::read;
constexpr auto W = LockMode::write;
constexpr auto C = LockMode::certify;

std::vector<Operation> H(const char* t) { return parse_schedule(t).ops(); }
}  // namespace

TEST(Compatibility, Monoversion) {
  EXPECT_TRUE(compatible(LockSemantics::monoversion, R, false, R));
  EXPECT_FALSE(compatible(LockSemantics::monoversion, R, false, W));
  EXPECT_FALSE(compatible(LockSemantics::monoversion, W, false, R));
  EXPECT_FALSE(compatible(LockSemantics::monoversion, W, false, W));
}

TEST(Compatibility, Mv2pl) {
  EXPECT_TRUE(compatible(LockSemantics::mv2pl, R, false, W));
  EXPECT_TRUE(compatible(LockSemantics::mv2pl, W, false, R));
  EXPECT_FALSE(compatible(LockSemantics::mv2pl, W, false, W));
  EXPECT_FALSE(compatible(LockSemantics::mv2pl, R, false, C));
  EXPECT_FALSE(compatible(LockSemantics::mv2pl, C, false, R));
}

TEST(Compatibility, Mal) {
  EXPECT_TRUE(compatible(LockSemantics::mal, W, false, R));
  EXPECT_TRUE(compatible(LockSemantics::mal, W, false, C));
  EXPECT_FALSE(compatible(LockSemantics::mal, R, false, W));
  EXPECT_FALSE(compatible(LockSemantics::mal, W, false, W));
  EXPECT_FALSE(compatible(LockSemantics::mal, R, false, C));
}

TEST(Compatibility, DonationWaivesExceptCertify) {
  EXPECT_TRUE(compatible(LockSemantics::monoversion, W, true, W));
  EXPECT_TRUE(compatible(LockSemantics::mal, R, true, W));
  EXPECT_FALSE(compatible(LockSemantics::mal, C, true, R));
}

TEST(Conflicts, Modes) {
  auto r1 = Operation::read(1, "x"), w1 = Operation::write(1, "x"), w2 = Operation::write(2, "x"),
       r2 = Operation::read(2, "x"), wy = Operation::write(2, "y");
  EXPECT_TRUE(conflicts(r1, w2, ConflictMode::rw_only));
  EXPECT_FALSE(conflicts(w1, r2, ConflictMode::rw_only));
  EXPECT_FALSE(conflicts(w1, r2, ConflictMode::rw_ww));
  EXPECT_TRUE(conflicts(w1, w2, ConflictMode::rw_ww));
  EXPECT_TRUE(conflicts(w1, r2, ConflictMode::all));
  EXPECT_FALSE(conflicts(w1, wy, ConflictMode::all));
  EXPECT_FALSE(conflicts(r1, r2, ConflictMode::all));
  EXPECT_FALSE(conflicts(r1, Operation::step(Action::certify_lock, 2, "x"), ConflictMode::all));
}

TEST(LockTable, BlocksAndGrants) {
  LockTable t;
  EXPECT_TRUE(t.acquire(1, "x", W).granted);
  auto r = t.acquire(2, "x", R);
  EXPECT_FALSE(r.granted);
  EXPECT_EQ(r.blockers, (std::set<TxnId>{1}));
  t.release(1, "x");
  EXPECT_TRUE(t.acquire(2, "x", R).granted);
}

TEST(LockTable, UpgradeInPlace) {
  LockTable t;
  t.acquire(1, "x", R);
  EXPECT_TRUE(t.acquire(1, "x", W).granted);
  EXPECT_EQ(t.find("x", 1)->mode, W);
  EXPECT_EQ(t.entries_of(1).size(), 1u);
}

TEST(LockTable, DonationRecordsWake) {
  LockTable t;
  t.acquire(1, "x", W);
  t.mark_accessed(1, "x");
  t.donate(1, "x");
  auto r = t.acquire(2, "x", W);
  EXPECT_TRUE(r.granted);
  EXPECT_EQ(r.waived, (std::set<TxnId>{1}));
  ASSERT_EQ(t.wakes().size(), 1u);
  EXPECT_EQ(t.wakes()[0].donor, 1u);
  EXPECT_EQ(t.wakes()[0].beneficiary, 2u);
  EXPECT_EQ(t.dump(), (std::vector<std::string>{"x t1 write donated", "x t2 write"}));
}

TEST(LockTable, DonationPreconditions) {
  LockTable t;
  EXPECT_THROW(t.donate(1, "x"), LockError);
  t.acquire(1, "x", W);
  EXPECT_THROW(t.donate(1, "x"), LockError);  // not accessed yet
  t.mark_accessed(1, "x");
  t.donate(1, "x");
  EXPECT_THROW(t.donate(1, "x"), LockError);
  try {
    t.acquire(1, "x", R);
    FAIL();
  } catch (const LockError& e) {
    EXPECT_EQ(e.rule(), "MAL1");
  }
  LockTable m(LockSemantics::mal);
  m.acquire(2, "y", W);
  m.mark_accessed(2, "y");
  m.donate(2, "y");
  EXPECT_TRUE(m.acquire(2, "y", C).granted);  // certify after donating is allowed
}

TEST(LockTable, ReleaseAllInAcquisitionOrder) {
  LockTable t;
  t.acquire(1, "y", R);
  t.acquire(1, "x", W);
  EXPECT_EQ(t.release_all(1), (std::vector<std::string>{"y", "x"}));
  EXPECT_TRUE(t.entries_of(1).empty());
}

TEST(Wake, MembershipClosesAtUnlock) {
  auto h = H("wl1(x)w1(x)d1(x)wl2(x)w2(x)wu1(x)rl2(y)r2(y)c1ru2(y)wu2(x)c2");
  EXPECT_TRUE(in_wake(h, 4, 1));   // w2(x) on the donated item
  EXPECT_FALSE(in_wake(h, 7, 1));  // y was never donated
  EXPECT_FALSE(in_wake(h, 1, 1));  // the donor's own step
}

// Indebtedness needs a donation by ti whose wake the conflicting op of tj
// lies in.
TEST(Indebtedness, ConflictInsideTheWake) {
  auto rw = H("rl1(x)r1(x)d1(x)wl2(x)w2(x)c1c2");
  EXPECT_TRUE(is_indebted(rw, 2, 1, ConflictMode::rw_only));
  EXPECT_FALSE(is_indebted(rw, 1, 2, ConflictMode::all));
  auto no_donation = H("rl1(x)r1(x)ru1(x)wl2(x)w2(x)c1c2");
  EXPECT_FALSE(is_indebted(no_donation, 2, 1, ConflictMode::all));
  auto wr = H("wl1(x)w1(x)d1(x)rl2(x)r2(x)c1c2");
  EXPECT_FALSE(is_indebted(wr, 2, 1, ConflictMode::rw_ww));
  EXPECT_TRUE(is_indebted(wr, 2, 1, ConflictMode::all));
  auto ww = H("wl1(x)w1(x)d1(x)wl2(x)w2(x)c1c2");
  EXPECT_TRUE(is_indebted(ww, 2, 1, ConflictMode::rw_ww));
  EXPECT_FALSE(is_indebted(ww, 2, 1, ConflictMode::rw_only));
}

TEST(Unlock, BeginsAtFirstUnlockOrTerminal) {
  auto h = H("rl1(x)r1(x)ru1(x)c1");
  EXPECT_EQ(begins_to_unlock(h, 1), std::optional<std::size_t>(2));
  auto g = H("r1(x)c1");
  EXPECT_EQ(begins_to_unlock(g, 1), std::optional<std::size_t>(1));
  EXPECT_FALSE(begins_to_unlock(g, 2));
}

TEST(Deadlock, CycleRotatedToSmallest) {
  WaitsForGraph g;
  g.add(3, 2, "y", W);
  g.add(1, 3, "z", W);
  g.add(2, 1, "x", W);
  EXPECT_EQ(detect_deadlock(g), (std::optional<std::vector<TxnId>>{{1, 3, 2}}));
  g.remove_txn(3);
  EXPECT_FALSE(detect_deadlock(g));
}
