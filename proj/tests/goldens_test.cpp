#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "malkit/goldens.hpp"

using namespace malkit;

TEST(Goldens, AllPass) {
  for (const auto& r : run_goldens()) EXPECT_TRUE(r.pass) << r.golden.id << ": " << r.observed;
}

TEST(Goldens, IdsUnique) {
  std::set<std::string> ids;
  for (const auto& g : golden_cases()) EXPECT_TRUE(ids.insert(g.id).second) << g.id;
}

// Every schedule string printed in the source text is listed in the manifest.
TEST(Goldens, ManifestCoversSourceSchedules) {
  std::set<std::string> listed;
  for (const auto& g : golden_cases()) listed.insert(g.schedule);
  for (const char* s : {"wl1(a)w1(a)d1(a)rl2(a)r2(a)rl2(b)r2(b)ru2(a)ru2(b)c2rl1(b)r1(b)wu1(a)ru1(b)c1",
                        "r1(x)r2(y)w1(y)w2(x)c1c2", "r1(x)r2(z)r3(z)w2(x)c2w3(y)c3r1(y)c1",
                        "r1(x)w2(x)w2(y)c2w3(z)w3(y)w1(z)c3c1", "r1(x)r1(y)w2(x)w2(y)w1(y)c1c2"})
    EXPECT_TRUE(listed.count(s)) << s;
}

TEST(Goldens, FormatTally) {
  std::string out = format_goldens(run_goldens());
  auto n = std::to_string(golden_cases().size());
  EXPECT_NE(out.find("GOLDENS " + n + "/" + n + " passed"), std::string::npos);
}
