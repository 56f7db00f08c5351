#include <gtest/gtest.h>

#include <set>

#include "malkit/auditor.hpp"

using namespace malkit;

namespace {

std::vector<std::string> rules(const char* h, Ruleset rs, UnlockMode m = UnlockMode::implied) {
  std::vector<std::string> out;
  for (const auto& v : audit(parse_schedule(h), rs, {m, std::nullopt})) out.push_back(v.rule);
  return out;
}

using V = std::vector<std::string>;

}  // namespace

TEST(WellFormed, ImpliedUnlocks) {
  EXPECT_TRUE(well_formed(parse_schedule("rl1(x)r1(x)c1")).ok);
  auto w = well_formed(parse_schedule("rl1(x)r1(x)c1"), UnlockMode::strict);
  EXPECT_FALSE(w.ok);
  EXPECT_EQ(w.position, 2u);
}

TEST(WellFormed, Defects) {
  EXPECT_FALSE(well_formed(parse_schedule("r1(x)c1")).ok);
  EXPECT_FALSE(well_formed(parse_schedule("rl1(x)w1(x)c1")).ok);
  EXPECT_FALSE(well_formed(parse_schedule("rl1(x)d1(x)r1(x)c1")).ok);
  EXPECT_FALSE(well_formed(parse_schedule("wl1(x)w1(x)d1(x)d1(x)c1")).ok);
  EXPECT_FALSE(well_formed(parse_schedule("ru1(x)c1")).ok);
}

TEST(Audit, MalformedYieldsSingleWf) {
  auto vs = audit(parse_schedule("r1(x)c1"), Ruleset::mal);
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].rule, "WF");
  EXPECT_EQ(format_violation(vs[0]).substr(0, 12), "RULE WF AT 0");
}

TEST(Audit, CleanTwoPhase) {
  EXPECT_EQ(rules("rl1(x)r1(x)wl1(x)w1(x)ru1(x)wu1(x)c1rl2(x)r2(x)ru2(x)c2", Ruleset::al, UnlockMode::strict), V{});
}

TEST(Audit, UseAfterDonate) {
  EXPECT_EQ(rules("wl1(x)w1(x)d1(x)r1(x)c1", Ruleset::mal), V{"MAL1"});
  EXPECT_EQ(rules("wl1(x)w1(x)d1(x)r1(x)c1", Ruleset::al), V{"AL1"});
}

TEST(Audit, DonationNeverReleased) {
  // Strict mode: the donated lock is never unlocked before the commit.
  EXPECT_EQ(rules("wl1(x)w1(x)d1(x)c1", Ruleset::mal, UnlockMode::strict), V{"WF"});
  EXPECT_EQ(rules("wl1(x)w1(x)d1(x)c1", Ruleset::mal), V{});
}

TEST(Audit, IncompatibleLock) {
  EXPECT_EQ(rules("wl1(x)w1(x)wl2(x)w2(x)c1c2", Ruleset::mal), V{"MAL3"});
  EXPECT_EQ(rules("wl1(x)w1(x)d1(x)wl2(x)w2(x)c1c2", Ruleset::mal), V{});
}

TEST(Audit, MalTableAllowsReadUnderWrite) {
  EXPECT_EQ(rules("wl1(x)w1(x)rl2(x)r2(x0)c2c1", Ruleset::mal), V{});
  EXPECT_EQ(rules("wl1(x)w1(x)rl2(x)r2(x)c2c1", Ruleset::al), V{"AL3"});
}

TEST(Audit, CertifyWaitsForOldReaders) {
  EXPECT_EQ(rules("wl1(x)w1(x)rl2(x)r2(x0)cl1(x)c1c2", Ruleset::mal), V{"MAL3"});
  EXPECT_EQ(rules("wl1(x)w1(x)d1(x)rl2(x)r2(x1)cl1(x)c1c2", Ruleset::mal), V{});
}

TEST(Audit, S1History) {
  const char* s1 = "wl1(a)w1(a)d1(a)rl2(a)r2(a)rl2(b)r2(b)ru2(a)ru2(b)c2rl1(b)r1(b)wu1(a)ru1(b)c1";
  auto vs = audit(parse_schedule(s1), Ruleset::al);
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].rule, "AL4");
  EXPECT_EQ(vs[0].positions, (std::vector<std::size_t>{6}));
  EXPECT_TRUE(audit(parse_schedule(s1), Ruleset::mal).empty());
}

TEST(Audit, CrossedHistoryBreaksWakeRule) {
  auto vs = audit(parse_schedule("rl1(x)r1(x)rl2(y)r2(y)d2(y)wl1(y)w1(y)d1(x)wl2(x)w2(x)c1c2"), Ruleset::mal);
  ASSERT_FALSE(vs.empty());
  for (const auto& v : vs) EXPECT_EQ(v.rule, "MAL4");
}

TEST(Audit, ExplicitIndebtednessOverride) {
  // Under rw_only a wr dependency alone does not indebt t2.
  const char* h = "wl1(x)w1(x)d1(x)rl2(x)r2(x1)rl2(y)r2(y)c2wl1(z)w1(z)c1";
  EXPECT_EQ(rules(h, Ruleset::al), V{"AL4"});
  auto vs = audit(parse_schedule(h), Ruleset::al, {UnlockMode::implied, ConflictMode::rw_only});
  EXPECT_TRUE(vs.empty());
}

// Rules 1-3 under mal flag a subset of what al flags, and so does the wake
// rule, since rw/ww indebtedness implies indebtedness under all conflicts.
TEST(Audit, MalViolationsAreAlViolations) {
  for (const char* h : {"wl1(x)w1(x)d1(x)r1(x)c1", "wl1(x)w1(x)wl2(x)w2(x)c1c2",
                        "wl1(a)w1(a)d1(a)rl2(a)r2(a)rl2(b)r2(b)ru2(a)ru2(b)c2rl1(b)r1(b)wu1(a)ru1(b)c1",
                        "rl1(x)r1(x)rl2(y)r2(y)d2(y)wl1(y)w1(y)d1(x)wl2(x)w2(x)c1c2"}) {
    std::set<std::pair<int, std::size_t>> al;
    for (const auto& v : audit(parse_schedule(h), Ruleset::al)) al.insert({v.rule.back() - '0', v.positions.front()});
    for (const auto& v : audit(parse_schedule(h), Ruleset::mal))
      EXPECT_TRUE(al.count({v.rule.back() - '0', v.positions.front()})) << h << " " << format_violation(v);
  }
}
