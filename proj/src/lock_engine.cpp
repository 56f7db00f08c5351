#include "malkit/lock_engine.hpp"

#include <algorithm>
#include <functional>

namespace malkit {

std::string_view mode_name(LockMode m) {
  switch (m) {
    case LockMode::read: return "read";
    case LockMode::write: return "write";
    case LockMode::certify: return "certify";
  }
  return "?";
}

LockMode lock_mode_for(Action a) {
  switch (a) {
    case Action::read:
    case Action::read_lock:
    case Action::read_unlock: return LockMode::read;
    case Action::write:
    case Action::write_lock:
    case Action::write_unlock: return LockMode::write;
    case Action::certify_lock:
    case Action::certify_unlock: return LockMode::certify;
    default: throw std::invalid_argument("no lock mode for " + std::string(action_token(a)));
  }
}

std::string_view conflict_mode_name(ConflictMode m) {
  switch (m) {
    case ConflictMode::all: return "all";
    case ConflictMode::rw_only: return "rw_only";
    case ConflictMode::rw_ww: return "rw_ww";
  }
  return "?";
}

bool compatible(LockSemantics sem, LockMode held, bool held_donated, LockMode requested) {
  if (held_donated && held != LockMode::certify) return true;
  if (held == LockMode::read && requested == LockMode::read) return true;
  switch (sem) {
    case LockSemantics::monoversion: return false;
    case LockSemantics::mv2pl:
      return (held == LockMode::read && requested == LockMode::write) ||
             (held == LockMode::write && requested == LockMode::read);
    case LockSemantics::mal:
      return held == LockMode::write && (requested == LockMode::read || requested == LockMode::certify);
  }
  return false;
}

bool conflicts(const Operation& earlier, const Operation& later, ConflictMode mode) {
  if (!is_data(earlier.action) || !is_data(later.action)) return false;
  if (earlier.txn == later.txn || earlier.item != later.item) return false;
  bool ew = earlier.action == Action::write;
  bool lw = later.action == Action::write;
  if (!ew && !lw) return false;
  if (!ew) return true;  // rw
  switch (mode) {
    case ConflictMode::all: return true;
    case ConflictMode::rw_only: return false;
    case ConflictMode::rw_ww: return lw;
  }
  return false;
}

AcquireResult LockTable::probe(TxnId txn, const std::string& item, LockMode mode,
                               const std::set<TxnId>& ignore) const {
  if (mode != LockMode::certify && donated_ever_.count({txn, item}))
    throw LockError("MAL1", "t" + std::to_string(txn) + " requests " + item + " after donating it");
  AcquireResult r;
  for (const auto& e : entries_) {
    if (e.item != item || e.holder == txn || ignore.count(e.holder)) continue;
    if (compatible(sem_, e.mode, false, mode)) continue;
    if (compatible(sem_, e.mode, e.donated, mode)) r.waived.insert(e.holder);
    else r.blockers.insert(e.holder);
  }
  r.granted = r.blockers.empty();
  return r;
}

AcquireResult LockTable::acquire(TxnId txn, const std::string& item, LockMode mode,
                                 const std::set<TxnId>& ignore) {
  AcquireResult r = probe(txn, item, mode, ignore);
  if (!r.granted) return r;
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const LockEntry& e) { return e.item == item && e.holder == txn; });
  if (it == entries_.end()) entries_.push_back({item, txn, mode, false, false});
  else if (static_cast<int>(mode) > static_cast<int>(it->mode)) it->mode = mode;
  for (TxnId donor : r.waived) {
    auto w = std::find_if(wakes_.begin(), wakes_.end(),
                          [&](const WakeRecord& rec) { return rec.donor == donor && rec.beneficiary == txn; });
    if (w == wakes_.end()) wakes_.push_back({donor, txn, {item}, false});
    else w->items.insert(item);
  }
  return r;
}

void LockTable::mark_accessed(TxnId txn, const std::string& item) {
  for (auto& e : entries_)
    if (e.item == item && e.holder == txn) e.accessed = true;
}

void LockTable::donate(TxnId txn, const std::string& item) {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const LockEntry& e) { return e.item == item && e.holder == txn; });
  std::string who = "t" + std::to_string(txn);
  if (it == entries_.end()) throw LockError("MAL1", who + " donates " + item + " without holding a lock");
  if (it->donated) throw LockError("MAL1", who + " donates " + item + " twice");
  if (it->mode == LockMode::certify) throw LockError("MAL1", who + " cannot donate a certify lock on " + item);
  if (!it->accessed) throw LockError("MAL1", who + " donates " + item + " before accessing it");
  it->donated = true;
  donated_ever_.insert({txn, item});
}

void LockTable::release(TxnId txn, const std::string& item) {
  std::erase_if(entries_, [&](const LockEntry& e) { return e.item == item && e.holder == txn; });
}

std::vector<std::string> LockTable::release_all(TxnId txn) {
  std::vector<std::string> items;
  for (const auto& e : entries_)
    if (e.holder == txn) items.push_back(e.item);
  std::erase_if(entries_, [&](const LockEntry& e) { return e.holder == txn; });
  return items;
}

const LockEntry* LockTable::find(const std::string& item, TxnId holder) const {
  for (const auto& e : entries_)
    if (e.item == item && e.holder == holder) return &e;
  return nullptr;
}

std::vector<LockEntry> LockTable::entries_of(TxnId holder) const {
  std::vector<LockEntry> out;
  for (const auto& e : entries_)
    if (e.holder == holder) out.push_back(e);
  return out;
}

bool LockTable::has_donated(TxnId holder, const std::string& item) const {
  return donated_ever_.count({holder, item}) > 0;
}

bool LockTable::any_donated() const {
  return std::any_of(entries_.begin(), entries_.end(), [](const LockEntry& e) { return e.donated; });
}

std::vector<std::string> LockTable::dump() const {
  std::vector<std::string> lines;
  for (const auto& e : entries_)
    lines.push_back(e.item + " t" + std::to_string(e.holder) + " " + std::string(mode_name(e.mode)) +
                    (e.donated ? " donated" : ""));
  std::sort(lines.begin(), lines.end());
  return lines;
}

namespace {

bool closes_wake(const Operation& op, TxnId donor, const std::string& item) {
  if (op.txn != donor) return false;
  if (is_terminal(op.action)) return true;
  return is_unlock(op.action) && op.item == item;
}

// Position of the donate step of `donor` on `item` that keeps `pos` in its wake.
std::optional<std::size_t> wake_donation(std::span<const Operation> h, std::size_t pos, TxnId donor,
                                         const std::string& item) {
  std::optional<std::size_t> d;
  for (std::size_t i = 0; i < pos; ++i) {
    const auto& op = h[i];
    if (op.action == Action::donate && op.txn == donor && op.item == item) d = i;
    else if (d && closes_wake(op, donor, item)) d.reset();
  }
  return d;
}

}  // namespace

bool in_wake(std::span<const Operation> h, std::size_t pos, TxnId donor) {
  const auto& p = h[pos];
  if (p.txn == donor || !is_data(p.action)) return false;
  return wake_donation(h, pos, donor, p.item).has_value();
}

bool is_indebted(std::span<const Operation> h, TxnId tj, TxnId ti, ConflictMode mode) {
  if (tj == ti) return false;
  for (std::size_t pos = 0; pos < h.size(); ++pos) {
    const auto& p = h[pos];
    if (p.txn != tj || !is_data(p.action)) continue;
    auto d = wake_donation(h, pos, ti, p.item);
    if (!d) continue;
    for (std::size_t o = 0; o < *d; ++o)
      if (h[o].txn == ti && conflicts(h[o], p, mode)) return true;
    for (std::size_t q = *d + 1; q < pos; ++q) {
      if (h[q].txn == ti || h[q].txn == tj || !is_data(h[q].action) || h[q].item != p.item) continue;
      if (!conflicts(h[q], p, mode)) continue;
      for (std::size_t o = 0; o < *d; ++o)
        if (h[o].txn == ti && conflicts(h[o], h[q], mode)) return true;
    }
  }
  return false;
}

std::optional<std::size_t> begins_to_unlock(std::span<const Operation> h, TxnId ti) {
  for (std::size_t i = 0; i < h.size(); ++i)
    if (h[i].txn == ti && (is_unlock(h[i].action) || is_terminal(h[i].action))) return i;
  return std::nullopt;
}

void WaitsForGraph::add(TxnId waiter, TxnId holder, const std::string& item, LockMode mode) {
  if (waiter != holder) edges_.insert({waiter, holder, item, mode});
}

void WaitsForGraph::clear_waiter(TxnId waiter) {
  std::erase_if(edges_, [&](const WaitEdge& e) { return e.waiter == waiter; });
}

void WaitsForGraph::remove_txn(TxnId t) {
  std::erase_if(edges_, [&](const WaitEdge& e) { return e.waiter == t || e.holder == t; });
}

std::optional<std::vector<TxnId>> detect_deadlock(const WaitsForGraph& g) {
  std::map<TxnId, std::set<TxnId>> adj;
  for (const auto& e : g.edges()) {
    adj[e.waiter].insert(e.holder);
    adj[e.holder];
  }
  std::map<TxnId, int> color;  // 0 white, 1 on stack, 2 done
  std::vector<TxnId> stack;
  std::optional<std::vector<TxnId>> cycle;
  std::function<bool(TxnId)> dfs = [&](TxnId u) {
    color[u] = 1;
    stack.push_back(u);
    for (TxnId v : adj[u]) {
      if (color[v] == 1) {
        cycle = std::vector<TxnId>(std::find(stack.begin(), stack.end(), v), stack.end());
        return true;
      }
      if (color[v] == 0 && dfs(v)) return true;
    }
    stack.pop_back();
    color[u] = 2;
    return false;
  };
  for (const auto& [n, _] : adj)
    if (color[n] == 0 && dfs(n)) break;
  if (cycle) std::rotate(cycle->begin(), std::min_element(cycle->begin(), cycle->end()), cycle->end());
  return cycle;
}

}  // namespace malkit
