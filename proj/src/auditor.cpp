#include "malkit/auditor.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace malkit {

std::string_view ruleset_name(Ruleset r) { return r == Ruleset::al ? "al" : "mal"; }

std::string format_violation(const Violation& v) {
  std::string out = "RULE " + v.rule + " AT ";
  for (std::size_t i = 0; i < v.positions.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v.positions[i]);
  }
  return out + ": " + v.explanation;
}

namespace {

std::string t(TxnId id) { return "t" + std::to_string(id); }

struct Expanded {
  std::vector<Operation> ops;
  std::vector<std::size_t> origin;  // position in the input history
};

// In implied mode, inserts unlocks for every lock still held before each
// commit/abort, in acquisition order.
Expanded expand(const Schedule& h, UnlockMode mode) {
  Expanded e;
  std::map<TxnId, std::vector<Operation>> held;  // lock steps in acquisition order
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& op = h[i];
    if (mode == UnlockMode::implied) {
      if (is_lock(op.action)) held[op.txn].push_back(op);
      if (is_unlock(op.action)) {
        auto& v = held[op.txn];
        Action lock = op.action == Action::read_unlock    ? Action::read_lock
                      : op.action == Action::write_unlock ? Action::write_lock
                                                          : Action::certify_lock;
        std::erase_if(v, [&](const Operation& l) { return l.item == op.item && l.action == lock; });
      }
      if (is_terminal(op.action)) {
        for (const auto& l : held[op.txn]) {
          Action u = l.action == Action::read_lock    ? Action::read_unlock
                     : l.action == Action::write_lock ? Action::write_unlock
                                                      : Action::certify_unlock;
          e.ops.push_back(Operation::step(u, op.txn, l.item));
          e.origin.push_back(i);
        }
        held.erase(op.txn);
      }
    }
    e.ops.push_back(op);
    e.origin.push_back(i);
  }
  return e;
}

using Held = std::map<std::pair<std::string, TxnId>, std::set<LockMode>>;

WellFormedness check_form(const std::vector<Operation>& ops) {
  Held held;
  std::set<std::pair<std::string, TxnId>> used, donated;
  auto fail = [](std::size_t pos, std::string why) { return WellFormedness{false, pos, std::move(why)}; };
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto& op = ops[i];
    auto key = std::make_pair(op.item, op.txn);
    auto& modes = held[key];
    switch (op.action) {
      case Action::read:
        if (!modes.count(LockMode::read) && !modes.count(LockMode::write))
          return fail(i, t(op.txn) + " reads " + op.item + " without a lock");
        used.insert(key);
        break;
      case Action::write:
        if (!modes.count(LockMode::write)) return fail(i, t(op.txn) + " writes " + op.item + " without a write lock");
        used.insert(key);
        break;
      case Action::read_lock:
      case Action::write_lock: {
        LockMode m = lock_mode_for(op.action);
        bool covered = modes.count(m) || (m == LockMode::read && modes.count(LockMode::write));
        if (covered) return fail(i, t(op.txn) + " already holds " + op.item + " in that mode");
        modes.insert(m);
        break;
      }
      case Action::certify_lock:
        if (!modes.count(LockMode::write)) return fail(i, t(op.txn) + " certifies " + op.item + " without a write lock");
        if (modes.count(LockMode::certify)) return fail(i, t(op.txn) + " already certified " + op.item);
        modes.insert(LockMode::certify);
        break;
      case Action::read_unlock:
      case Action::write_unlock:
      case Action::certify_unlock:
        if (!modes.erase(lock_mode_for(op.action)))
          return fail(i, t(op.txn) + " unlocks " + op.item + " without holding that lock");
        break;
      case Action::donate:
        if (modes.empty()) return fail(i, t(op.txn) + " donates " + op.item + " without holding a lock");
        if (!used.count(key)) return fail(i, t(op.txn) + " donates " + op.item + " before accessing it");
        if (!donated.insert(key).second) return fail(i, t(op.txn) + " donates " + op.item + " twice");
        break;
      case Action::commit:
      case Action::abort:
        for (const auto& [k, ms] : held)
          if (k.second == op.txn && !ms.empty())
            return fail(i, t(op.txn) + " terminates while holding a lock on " + k.first);
        break;
    }
  }
  return {};
}

bool compatible_modes(Ruleset rs, LockMode held, bool donated, LockMode requested) {
  return compatible(rs == Ruleset::al ? LockSemantics::monoversion : LockSemantics::mal, held, donated, requested);
}

}  // namespace

WellFormedness well_formed(const Schedule& h, UnlockMode mode) {
  Expanded e = expand(h, mode);
  WellFormedness w = check_form(e.ops);
  if (!w.ok) w.position = e.origin[w.position];
  return w;
}

std::vector<Violation> audit(const Schedule& h, Ruleset rules, const AuditOptions& opts) {
  Expanded e = expand(h, opts.unlocks);
  const auto& ops = e.ops;
  if (WellFormedness w = check_form(ops); !w.ok)
    return {{"WF", {e.origin[w.position]}, w.defect}};

  std::string prefix = rules == Ruleset::al ? "AL" : "MAL";
  ConflictMode mode = opts.indebtedness.value_or(rules == Ruleset::al ? ConflictMode::all : ConflictMode::rw_only);
  bool literal = rules == Ruleset::al;
  std::vector<Violation> out;
  auto report = [&](int rule, std::vector<std::size_t> pos, std::string why) {
    for (auto& p : pos) p = e.origin[p];
    std::sort(pos.begin(), pos.end());
    pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
    out.push_back({prefix + std::to_string(rule), std::move(pos), std::move(why)});
  };

  // Rules 1 and 2.
  for (std::size_t d = 0; d < ops.size(); ++d) {
    if (ops[d].action != Action::donate) continue;
    const auto& don = ops[d];
    bool released = false;
    for (std::size_t k = d + 1; k < ops.size(); ++k) {
      const auto& op = ops[k];
      if (op.txn != don.txn) continue;
      if (is_terminal(op.action)) break;
      if (op.item != don.item) continue;
      if (is_unlock(op.action)) {
        released = true;
        break;
      }
      if (is_data(op.action) || op.action == Action::read_lock || op.action == Action::write_lock)
        report(1, {d, k}, t(don.txn) + " uses " + don.item + " after donating it");
    }
    if (!released) report(2, {d}, t(don.txn) + " never unlocks donated " + don.item);
  }

  // Rule 3: every lock step must be compatible with the other holders.
  {
    Held held;
    std::set<std::pair<std::string, TxnId>> donated;
    std::map<std::pair<std::string, TxnId>, std::set<TxnId>> read_versions;  // (item, reader) -> writers
    // Version order is the order of each writer's last write.
    std::map<std::pair<std::string, TxnId>, std::size_t> written;
    for (std::size_t i = 0; i < ops.size(); ++i)
      if (ops[i].action == Action::write) written[{ops[i].item, ops[i].txn}] = i;
    auto later_version = [&](const std::string& item, TxnId base, TxnId w) {
      auto a = written.find({item, base}), b = written.find({item, w});
      return a != written.end() && b != written.end() && b->second > a->second;
    };
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const auto& op = ops[i];
      auto key = std::make_pair(op.item, op.txn);
      if (op.action == Action::read && op.version) read_versions[key].insert(*op.version);
      if (op.action == Action::donate) donated.insert(key);
      if (is_unlock(op.action)) held[key].erase(lock_mode_for(op.action));
      if (!is_lock(op.action)) continue;
      LockMode want = lock_mode_for(op.action);
      for (const auto& [k, modes] : held) {
        if (k.first != op.item || k.second == op.txn || modes.empty()) continue;
        // An upgrade replaces the weaker lock, so only the strongest mode counts.
        for (LockMode m : {*modes.rbegin()}) {
          if (compatible_modes(rules, m, donated.count(k) > 0, want)) continue;
          if (want == LockMode::certify && m == LockMode::read && !read_versions[k].empty() &&
              std::all_of(read_versions[k].begin(), read_versions[k].end(), [&](TxnId w) {
                return w == op.txn || later_version(op.item, op.txn, w);
              }))
            continue;
          report(3, {i}, t(op.txn) + " acquires " + std::string(mode_name(want)) + " on " + op.item + " while " +
                             t(k.second) + " holds an undonated " + std::string(mode_name(m)) + " lock");
        }
      }
      held[key].insert(want);
    }
  }

  // Rule 4: an indebted transaction stays in the donor's wake until the donor
  // begins to unlock.
  std::span<const Operation> hs(ops);
  std::set<TxnId> donors, members;
  for (const auto& op : ops) {
    members.insert(op.txn);
    if (op.action == Action::donate) donors.insert(op.txn);
  }
  for (TxnId i : donors) {
    std::size_t until = begins_to_unlock(hs, i).value_or(ops.size());
    for (TxnId j : members) {
      if (j == i || !is_indebted(hs, j, i, mode)) continue;
      for (std::size_t p = 0; p < until; ++p) {
        const auto& op = ops[p];
        if (op.txn != j || !is_data(op.action)) continue;
        if (in_wake(hs, p, i)) continue;
        if (!literal) {
          bool clash = false;
          for (std::size_t q = 0; q < ops.size() && !clash; ++q)
            if (ops[q].txn == i) clash = q < p ? conflicts(ops[q], op, mode) : conflicts(op, ops[q], mode);
          if (!clash) continue;
        }
        report(4, {p}, t(j) + " is indebted to " + t(i) + " but " + format_operation(op) +
                           " lies outside its wake before " + t(i) + " unlocks");
      }
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
    return a.positions.front() < b.positions.front();
  });
  return out;
}

}  // namespace malkit
