#include "malkit/goldens.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "malkit/auditor.hpp"
#include "malkit/harness.hpp"
#include "malkit/scheduler.hpp"

namespace malkit {

namespace {

constexpr const char* kS1 = "wl1(a)w1(a)d1(a)rl2(a)r2(a)rl2(b)r2(b)ru2(a)ru2(b)c2rl1(b)r1(b)wu1(a)ru1(b)c1";
constexpr const char* kS1Read = "w1(a)r2(a)r2(b)c2r1(b)c1";
constexpr const char* kS1Write = "w1(a)r2(a)r2(b)c2w1(b)c1";
constexpr const char* kCrossed = "r1(x)r2(y)w1(y)w2(x)c1c2";
constexpr const char* kCrossedHistory = "rl1(x)r1(x)rl2(y)r2(y)d2(y)wl1(y)w1(y)d1(x)wl2(x)w2(x)c1c2";
constexpr const char* kAlGap = "r1(x)r2(z)r3(z)w2(x)c2w3(y)c3r1(y)c1";
constexpr const char* kThree = "r1(x)w2(x)w2(y)c2w3(z)w3(y)w1(z)c3c1";
constexpr const char* kLateWrite = "r1(x)r1(y)w2(x)w2(y)w1(y)c1c2";
constexpr const char* kHybrid = "r1(x) w2(x)~ r3(x) r4(y) r5(y) r2(y) w3(z) c3 r5(z) w4(z) c1 c2 c5";
constexpr const char* kHybridPlain = "r1(x) w2(x)! r3(x) r4(y) r5(y) r2(y) w3(z) c3 r5(z) w4(z) c1 c2 c5";
constexpr const char* kMvto = "r1(x)w2(x)r1(y)w2(y)c2c1";
constexpr const char* kBlind = "w1(x)w2(x)w3(x)r4(x)c1c2c3c4";

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

// Fixtures that carry their own hints run as given; the rest get every final
// access marked.
RunOutcome run_on(const std::string& protocol, const std::string& schedule, bool mark) {
  SchedulerConfig cfg;
  auto p = parse_protocol(protocol);
  if (!p) throw std::invalid_argument("unknown protocol " + protocol);
  cfg.protocol = *p;
  Schedule s = parse_schedule(schedule);
  return run(cfg, mark ? annotate_last_access(s) : s);
}

}  // namespace

const std::vector<GoldenCase>& golden_cases() {
  static const std::vector<GoldenCase> cases{
      {"s1-history-al", "audit", "al", kS1, "AL4"},
      {"s1-history-mal", "audit", "mal", kS1, "clean"},
      {"s1-read-csr", "class", "csr", kS1Read, "member"},
      {"s1-write-csr", "class", "csr", kS1Write, "non-member"},
      {"s1-read-al", "run", "al", kS1Read, "not_generated AL4"},
      {"s1-read-mal", "run", "mal", kS1Read, "accepted"},
      {"s1-write-al", "run", "al", kS1Write, "not_generated AL4"},
      {"s1-write-mal", "run", "mal", kS1Write, "accepted"},
      {"crossed-mvcsr", "class", "mvcsr", kCrossed, "non-member"},
      {"crossed-mvsr", "class", "mvsr", kCrossed, "non-member"},
      {"crossed-mal", "run", "mal", kCrossed, "not_generated MAL4"},
      {"crossed-history-mal", "audit", "mal", kCrossedHistory, "MAL4"},
      {"al-gap-al", "run", "al", kAlGap, "not_generated AL4"},
      {"al-gap-mal", "run", "mal", kAlGap, "accepted"},
      {"al-gap-mal-reads", "reads", "mal", kAlGap, "r1(x0) r2(z0) r3(z0) r1(y3)"},
      {"three-mv2pl", "run", "mv2pl", kThree, "deadlock t1->t3->t2"},
      {"three-2v2pl", "run", "2v2pl", kThree, "deadlock t1->t3->t2"},
      {"three-mal", "run", "mal", kThree, "accepted"},
      {"three-mal-versions", "versions", "mal", kThree,
       "x:{x0,x2} y:{y0,y2,y3} z:{z0,z3,z1} peak=8 uncommitted_reads=0"},
      {"late-write-mvcsr", "class", "mvcsr", kLateWrite, "member"},
      {"late-write-mal", "run", "mal", kLateWrite, "not_generated"},
      {"hybrid-flagged", "commits", "mal_mvto", kHybrid, "commits t3,t1,t2,t5 aborted t4"},
      {"hybrid-unflagged", "commits", "mal_mvto", kHybridPlain, "commits t1,t2,t3"},
      {"mvto-reads", "reads", "mvto", kMvto, "r1(x0) r1(y0)"},
      {"mvto-run", "run", "mvto", kMvto, "accepted"},
      {"blind-vsr", "class", "vsr", kBlind, "member"},
      {"blind-csr", "class", "csr", kBlind, "member"},
  };
  return cases;
}

std::string observe(const GoldenCase& g) {
  if (g.kind == "class") return class_member(g.subject, parse_schedule(g.schedule)) ? "member" : "non-member";
  if (g.kind == "audit") {
    auto rules = g.subject == "al" ? Ruleset::al : Ruleset::mal;
    std::set<std::string> seen;
    for (const auto& v : audit(parse_schedule(g.schedule), rules)) seen.insert(v.rule);
    return seen.empty() ? "clean" : join({seen.begin(), seen.end()}, " ");
  }
  RunOutcome r = run_on(g.subject, g.schedule, g.kind != "commits");
  if (g.kind == "run") {
    std::string out(status_name(r.status));
    for (const auto& line : r.trace)
      if (!line.decision.rule.empty()) {
        out += " " + line.decision.rule;
        break;
      }
    if (r.deadlock_cycle) {
      std::vector<std::string> names;
      for (TxnId t : *r.deadlock_cycle) names.push_back("t" + std::to_string(t));
      out += " " + join(names, "->");
    }
    return out;
  }
  if (g.kind == "reads") {
    std::vector<std::string> reads;
    for (const auto& op : r.history.ops())
      if (op.action == Action::read) {
        Operation plain = op;
        plain.last_access = plain.no_more_writes = false;
        reads.push_back(format_operation(plain));
      }
    return join(reads, " ");
  }
  if (g.kind == "versions") return format_stats(r.stats);
  if (g.kind == "commits") {
    std::vector<std::string> commits, aborted;
    for (const auto& op : r.history.ops())
      if (op.action == Action::commit) commits.push_back("t" + std::to_string(op.txn));
    for (TxnId t : r.aborted) aborted.push_back("t" + std::to_string(t));
    std::string out = "commits " + join(commits, ",");
    if (!aborted.empty()) out += " aborted " + join(aborted, ",");
    return out;
  }
  throw std::invalid_argument("unknown golden kind " + g.kind);
}

std::vector<GoldenResult> run_goldens() {
  std::vector<GoldenResult> out;
  for (const auto& g : golden_cases()) {
    std::string seen = observe(g);
    out.push_back({g, seen, seen == g.expected});
  }
  return out;
}

std::string format_goldens(const std::vector<GoldenResult>& results) {
  std::string out;
  std::size_t passed = 0;
  for (const auto& r : results) {
    passed += r.pass;
    out += std::string(r.pass ? "PASS " : "FAIL ") + r.golden.id + " " + r.golden.kind + " " + r.golden.subject + ": " +
           r.observed;
    if (!r.pass) out += " (expected " + r.golden.expected + ")";
    out += "\n";
  }
  out += "GOLDENS " + std::to_string(passed) + "/" + std::to_string(results.size()) + " passed\n";
  return out;
}

}  // namespace malkit
