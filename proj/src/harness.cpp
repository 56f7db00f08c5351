#include "malkit/harness.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace malkit {

std::string describe(const SpaceSpec& space) {
  std::string kinds = std::string(space.reads ? "r" : "") + (space.writes ? "w" : "");
  return std::to_string(space.txns) + "x" + std::to_string(space.ops) + "x" + std::to_string(space.items) + " " +
         kinds + (space.hints ? " hints" : "");
}

namespace {

std::string item_name(std::size_t i) {
  static const char* names[] = {"x", "y", "z", "u", "v", "w"};
  if (i < 6) return names[i];
  std::string s;
  for (std::size_t n = i - 6;; n = n / 26 - 1) {
    s.insert(s.begin(), static_cast<char>('a' + n % 26));
    if (n < 26) break;
  }
  return "q" + s;
}

struct Builder {
  const SpaceSpec& space;
  std::vector<Action> kinds;
  std::vector<Operation> ops;
  std::vector<std::vector<std::pair<Action, std::size_t>>> programs;  // per started txn
  std::vector<bool> committed;
  std::size_t items_used = 0;
  // Visitor returns false to stop.
  std::function<bool()> leaf;

  explicit Builder(const SpaceSpec& s) : space(s) {
    if (s.reads) kinds.push_back(Action::read);
    if (s.writes) kinds.push_back(Action::write);
  }

  bool data_step(std::size_t t) {
    for (Action k : kinds) {
      for (std::size_t it = 0; it <= items_used && it < space.items; ++it) {
        const auto& prog = programs[t];
        if (std::find(prog.begin(), prog.end(), std::make_pair(k, it)) != prog.end()) continue;
        bool fresh = it == items_used;
        programs[t].emplace_back(k, it);
        ops.push_back(Operation::step(k, static_cast<TxnId>(t + 1), item_name(it)));
        if (fresh) ++items_used;
        bool go = rec();
        if (fresh) --items_used;
        ops.pop_back();
        programs[t].pop_back();
        if (!go) return false;
      }
    }
    return true;
  }

  bool rec() {
    if (programs.size() == space.txns && std::all_of(committed.begin(), committed.end(), [](bool c) { return c; }))
      return leaf();
    for (std::size_t t = 0; t < programs.size(); ++t) {
      if (committed[t]) continue;
      if (programs[t].size() < space.ops && !data_step(t)) return false;
      if (!programs[t].empty()) {
        committed[t] = true;
        ops.push_back(Operation::commit(static_cast<TxnId>(t + 1)));
        bool go = rec();
        ops.pop_back();
        committed[t] = false;
        if (!go) return false;
      }
    }
    if (programs.size() < space.txns) {
      programs.emplace_back();
      committed.push_back(false);
      bool go = data_step(programs.size() - 1);
      committed.pop_back();
      programs.pop_back();
      if (!go) return false;
    }
    return true;
  }
};

}  // namespace

std::size_t count_space(const SpaceSpec& space) {
  if (space.txns == 0 || space.ops == 0 || space.items == 0 || (!space.reads && !space.writes)) return 0;
  Builder b(space);
  std::size_t n = 0;
  b.leaf = [&] { return ++n <= space.cap; };
  b.rec();
  return n;
}

void enumerate(const SpaceSpec& space, const std::function<void(const Schedule&)>& visit) {
  std::size_t n = count_space(space);
  if (n > space.cap)
    throw CapExceeded("space " + describe(space) + " exceeds the cap of " + std::to_string(space.cap) + " schedules");
  if (n == 0) return;
  Builder b(space);
  b.leaf = [&] {
    visit(Schedule(b.ops));
    return true;
  };
  b.rec();
}

Schedule annotate_last_access(const Schedule& s) {
  std::vector<Operation> ops = s.ops();
  std::set<std::pair<TxnId, std::string>> seen;
  for (std::size_t i = ops.size(); i-- > 0;) {
    if (!is_data(ops[i].action)) continue;
    ops[i].last_access = seen.insert({ops[i].txn, ops[i].item}).second;
  }
  return Schedule(std::move(ops));
}

Schedule with_eager_donations(const Schedule& s, const std::vector<std::pair<TxnId, std::string>>& pairs) {
  std::map<std::pair<TxnId, std::string>, std::size_t> last;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (is_data(s[i].action)) last[{s[i].txn, s[i].item}] = i;
  std::set<std::size_t> after;
  for (const auto& p : pairs)
    if (auto it = last.find(p); it != last.end()) after.insert(it->second);
  std::vector<Operation> ops;
  for (std::size_t i = 0; i < s.size(); ++i) {
    ops.push_back(s[i]);
    if (after.count(i)) ops.push_back(Operation::step(Action::donate, s[i].txn, s[i].item));
  }
  return Schedule(std::move(ops));
}

std::string Subject::name() const {
  return kind == Kind::klass ? klass : std::string(protocol_name(protocol));
}

std::optional<Subject> parse_subject(std::string_view name) {
  for (const char* c : {"csr", "vsr", "mvcsr", "mvsr"})
    if (name == c) return Subject{Subject::Kind::klass, Protocol::mal, std::string(c)};
  std::string n(name);
  std::replace(n.begin(), n.end(), '-', '_');
  if (auto p = parse_protocol(n)) return Subject{Subject::Kind::protocol, *p, {}};
  return std::nullopt;
}

namespace {

// Pairs (t, x) whose eager donation can differ from a lazy one: some other
// transaction touches x after t's final access.
std::vector<std::pair<TxnId, std::string>> eager_candidates(const Schedule& s) {
  std::map<std::pair<TxnId, std::string>, std::size_t> last;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (is_data(s[i].action)) last[{s[i].txn, s[i].item}] = i;
  std::vector<std::pair<TxnId, std::string>> out;
  for (const auto& [key, pos] : last) {
    for (std::size_t j = pos + 1; j < s.size(); ++j)
      if (is_data(s[j].action) && s[j].txn != key.first && s[j].item == key.second) {
        out.push_back(key);
        break;
      }
  }
  return out;
}

bool accepts(const SchedulerConfig& cfg, const Schedule& input, GenResult& out) {
  RunOptions opts;
  opts.stop_at_first_miss = true;
  RunOutcome r = run(cfg, input, opts);
  if (r.status != RunStatus::accepted) return false;
  out.member = true;
  out.run = std::move(r);
  out.input = input;
  return true;
}

}  // namespace

GenResult generated_by(Protocol p, const Schedule& s, bool hint_search) {
  GenResult out;
  SchedulerConfig cfg;
  cfg.protocol = p;
  bool donating = p == Protocol::al || p == Protocol::mal;
  if (!hint_search || !donating) {
    accepts(cfg, hint_search ? annotate_last_access(s) : s, out);
    return out;
  }
  Schedule hinted = annotate_last_access(s);
  std::vector<bool> read_modes{false};
  if (p == Protocol::mal) read_modes.push_back(true);
  auto cands = eager_candidates(s);
  for (bool rd : read_modes) {
    cfg.read_donated = rd;
    for (std::size_t mask = 0; mask < (std::size_t{1} << cands.size()); ++mask) {
      std::vector<std::pair<TxnId, std::string>> chosen;
      for (std::size_t i = 0; i < cands.size(); ++i)
        if (mask >> i & 1) chosen.push_back(cands[i]);
      if (accepts(cfg, chosen.empty() ? hinted : with_eager_donations(hinted, chosen), out)) return out;
    }
  }
  return out;
}

bool class_member(const std::string& klass, const Schedule& raw, const std::optional<VersionFunction>& vf) {
  Schedule s = data_projection(raw);
  if (klass == "csr") return is_csr(s).member;
  if (klass == "vsr") return is_vsr(s).member;
  VersionFunction f = vf ? *vf : committed_read_vf(s);
  if (klass == "mvcsr") return is_mvcsr(s, f).member;
  if (klass == "mvsr") return is_mvsr(s, f).member;
  throw std::invalid_argument("unknown class " + klass);
}

ComparisonReport compare(const Subject& a, const Subject& b, const SpaceSpec& space) {
  ComparisonReport r;
  r.space = space;
  r.a = a.name();
  r.b = b.name();
  enumerate(space, [&](const Schedule& s) {
    // A class is judged with the version function of a generating run when the
    // other side is a protocol that accepted the schedule.
    std::optional<VersionFunction> vf;
    auto side = [&](const Subject& x, const Subject& other) {
      if (x.kind == Subject::Kind::protocol) return generated_by(x.protocol, s, space.hints).member;
      if (other.kind == Subject::Kind::protocol && !vf) {
        GenResult g = generated_by(other.protocol, s, space.hints);
        vf = g.member ? std::optional(g.run->vf) : std::optional<VersionFunction>(committed_read_vf(data_projection(s)));
      }
      return class_member(x.klass, s, vf);
    };
    bool in_a = side(a, b);
    bool in_b = side(b, a);
    std::size_t region = in_a && in_b ? 0 : in_a ? 1 : in_b ? 2 : 3;
    ++r.counts[region];
    ++r.total;
    if (r.witnesses[region].size() < kWitnessCap) r.witnesses[region].push_back(format_schedule(s));
  });
  r.inclusion = r.counts[1] == 0;
  return r;
}

std::string format_report(const ComparisonReport& r) {
  std::string out = "COMPARE " + r.a + " " + r.b + " space " + describe(r.space) + " total " +
                    std::to_string(r.total) + "\n";
  for (std::size_t i = 0; i < 4; ++i) {
    out += "REGION " + std::string(kRegionNames[i]) + " " + std::to_string(r.counts[i]) + "\n";
    for (const auto& w : r.witnesses[i]) out += "  " + w + "\n";
  }
  out += "INCLUSION " + r.a + " <= " + r.b + " " + (r.inclusion ? "holds" : "fails") + "\n";
  return out;
}

Census census(const Schedule& s, bool hint_search) {
  Census c;
  Schedule d = data_projection(s);
  c.csr = is_csr(d).member;
  c.vsr = is_vsr(d).member;
  VersionFunction vf = committed_read_vf(d);
  c.mvcsr = is_mvcsr(d, vf).member;
  c.mvsr = is_mvsr(d, vf).member;
  c.mvsr_by_order = is_mvsr_by_version_order(d, vf).member;
  c.g2pl = generated_by(Protocol::two_pl, s, hint_search).member;
  c.gal = generated_by(Protocol::al, s, hint_search).member;
  GenResult mal = generated_by(Protocol::mal, s, hint_search);
  c.gmal = mal.member;
  if (mal.member) c.mal_output_mvcsr = is_mvcsr(d, mal.run->vf).member;
  c.gmv2pl = generated_by(Protocol::mv2pl, s, hint_search).member;
  c.g2v2pl = generated_by(Protocol::two_v2pl, s, hint_search).member;
  return c;
}

}  // namespace malkit
