#include "malkit/scheduler.hpp"

#include <algorithm>
#include <deque>

#include "malkit/oracles.hpp"

namespace malkit {

std::string_view protocol_name(Protocol p) {
  switch (p) {
    case Protocol::two_pl: return "2pl";
    case Protocol::al: return "al";
    case Protocol::mal: return "mal";
    case Protocol::mv2pl: return "mv2pl";
    case Protocol::two_v2pl: return "2v2pl";
    case Protocol::mvto: return "mvto";
    case Protocol::mal_mvto: return "mal_mvto";
  }
  return "?";
}

const std::vector<Protocol>& all_protocols() {
  static const std::vector<Protocol> all{Protocol::two_pl, Protocol::al,   Protocol::mal,     Protocol::mv2pl,
                                         Protocol::two_v2pl, Protocol::mvto, Protocol::mal_mvto};
  return all;
}

std::optional<Protocol> parse_protocol(std::string_view name) {
  for (Protocol p : all_protocols())
    if (protocol_name(p) == name) return p;
  return std::nullopt;
}

namespace {

bool is_locking(Protocol p) { return p != Protocol::mvto && p != Protocol::mal_mvto; }
bool is_multiversion(Protocol p) { return p != Protocol::two_pl && p != Protocol::al; }
bool donates(Protocol p) { return p == Protocol::al || p == Protocol::mal; }
bool certifies(Protocol p) { return p == Protocol::mal || p == Protocol::mv2pl || p == Protocol::two_v2pl; }

LockSemantics semantics_of(Protocol p) {
  switch (p) {
    case Protocol::mal: return LockSemantics::mal;
    case Protocol::mv2pl:
    case Protocol::two_v2pl: return LockSemantics::mv2pl;
    default: return LockSemantics::monoversion;
  }
}

std::string txn_list(const std::set<TxnId>& ts) {
  std::string out;
  for (TxnId t : ts) {
    if (!out.empty()) out += ',';
    out += 't' + std::to_string(t);
  }
  return out;
}

Action unlock_of(LockMode m) {
  switch (m) {
    case LockMode::read: return Action::read_unlock;
    case LockMode::write: return Action::write_unlock;
    case LockMode::certify: return Action::certify_unlock;
  }
  return Action::read_unlock;
}

Action lock_of(LockMode m) {
  switch (m) {
    case LockMode::read: return Action::read_lock;
    case LockMode::write: return Action::write_lock;
    case LockMode::certify: return Action::certify_lock;
  }
  return Action::read_lock;
}

}  // namespace

SchedulerConfig validated(SchedulerConfig cfg) {
  if (cfg.protocol == Protocol::two_v2pl) {
    if (cfg.max_versions && *cfg.max_versions != 2) throw ConfigError("2v2pl keeps exactly 2 versions");
    cfg.max_versions = 2;
  }
  if (cfg.max_versions && *cfg.max_versions < 1) throw ConfigError("max_versions must be positive");
  if (cfg.max_versions && !is_multiversion(cfg.protocol))
    throw ConfigError(std::string(protocol_name(cfg.protocol)) + " is monoversion");
  if (cfg.read_donated && cfg.protocol != Protocol::mal) throw ConfigError("read_donated applies to mal only");
  if (!cfg.indebtedness) {
    if (cfg.protocol == Protocol::al) cfg.indebtedness = ConflictMode::all;
    if (cfg.protocol == Protocol::mal) cfg.indebtedness = ConflictMode::rw_only;
  }
  return cfg;
}

std::string format_decision(const Decision& d) {
  std::string out;
  switch (d.kind) {
    case Decision::Kind::execute: out = "execute"; break;
    case Decision::Kind::block: out = "block on " + txn_list(d.on); break;
    case Decision::Kind::reject:
      out = "reject " + d.rule;
      if (!d.on.empty()) out += " on " + txn_list(d.on);
      break;
    case Decision::Kind::abort: out = "abort t" + std::to_string(d.aborted) + ' ' + d.rule; break;
    case Decision::Kind::queued: out = "queued"; break;
    case Decision::Kind::skip: out = "skip"; break;
  }
  if (!d.emitted.empty()) {
    out += " [";
    for (std::size_t i = 0; i < d.emitted.size(); ++i) {
      if (i) out += ' ';
      out += format_operation(d.emitted[i]);
    }
    out += ']';
  }
  if (!d.reason.empty()) out += ": " + d.reason;
  return out;
}

std::string_view status_name(RunStatus s) {
  switch (s) {
    case RunStatus::accepted: return "accepted";
    case RunStatus::not_generated: return "not_generated";
    case RunStatus::deadlock: return "deadlock";
  }
  return "?";
}

std::string format_trace_line(const TraceLine& t) {
  return std::to_string(t.step) + ' ' + format_operation(t.op) + " -> " + format_decision(t.decision);
}

std::string format_outcome(const RunOutcome& o) {
  std::string out;
  for (const auto& t : o.trace) out += format_trace_line(t) + '\n';
  out += "STATUS " + std::string(status_name(o.status));
  if (o.deadlock_cycle) {
    out += " cycle ";
    for (std::size_t i = 0; i < o.deadlock_cycle->size(); ++i) {
      if (i) out += "->";
      out += 't' + std::to_string((*o.deadlock_cycle)[i]);
    }
  }
  if (!o.aborted.empty()) out += " aborted " + txn_list(o.aborted);
  out += "\nVERSIONS " + format_stats(o.stats) + '\n';
  return out;
}

struct TxnInfo {
  std::uint64_t ts = 0;
  bool terminated = false;
  bool aborted = false;
  std::set<std::string> finished;  // items whose last access executed
  bool no_more_writes = false;
  std::vector<std::string> write_order;
  std::vector<std::pair<std::string, LockMode>> acquired;
  std::set<TxnId> read_uncommitted_from;
};

struct ReadRecord {
  TxnId reader;
  std::string item;
  TxnId version;
};

struct Scheduler::State {
  LockTable locks;
  VersionStore store;
  std::vector<Operation> hist;
  std::vector<Operation> data;  // data and terminal steps of hist
  VersionFunction vf;           // keyed by positions in data
  std::map<TxnId, TxnInfo> txns;
  std::uint64_t next_ts = 1;
  WaitsForGraph wfg;
  std::vector<ReadRecord> reads;
  std::set<TxnId> aborted;
  bool donated_ever = false;
};

namespace {

using State = Scheduler::State;

// Outcome of an internal step attempt: nullopt means the step executed.
struct Miss {
  Decision::Kind kind;
  std::set<TxnId> on;
  std::string rule;
  std::string reason;
};

class RuleFailure : public std::runtime_error {
 public:
  RuleFailure(std::string rule, const std::string& what) : std::runtime_error(what), rule(std::move(rule)) {}
  std::string rule;
};

class Engine {
 public:
  Engine(const SchedulerConfig& cfg, State& s, std::vector<Operation>& emitted)
      : cfg_(cfg), s_(s), emitted_(emitted) {}

  std::optional<Miss> step(const Operation& op, std::optional<TxnId>& version) {
    if (op.action == Action::donate) return explicit_donate(op);
    if (is_locking(cfg_.protocol)) return locking_step(op, version);
    return mvto_step(op, version);
  }

 private:
  std::string rule(int n) const { return (cfg_.protocol == Protocol::al ? "AL" : "MAL") + std::to_string(n); }

  void emit(Operation op) {
    s_.hist.push_back(op);
    if (is_data(op.action) || is_terminal(op.action)) s_.data.push_back(op);
    emitted_.push_back(std::move(op));
  }

  void emit_read(const Operation& op, TxnId version) {
    Operation r = Operation::read(op.txn, op.item, is_multiversion(cfg_.protocol) ? std::optional(version) : std::nullopt);
    r.last_access = op.last_access;
    emit(r);
    s_.vf.assign(s_.data.size() - 1, version);
    s_.reads.push_back({op.txn, op.item, version});
  }

  void donate(TxnId holder, const std::string& item) {
    s_.locks.donate(holder, item);
    s_.donated_ever = true;
    emit(Operation::step(Action::donate, holder, item));
  }

  std::optional<Miss> explicit_donate(const Operation& op) {
    if (!is_locking(cfg_.protocol) || !donates(cfg_.protocol))
      return Miss{Decision::Kind::reject, {}, "WF", std::string(protocol_name(cfg_.protocol)) + " has no donation"};
    try {
      donate(op.txn, op.item);
    } catch (const LockError& e) {
      return Miss{Decision::Kind::reject, {}, "WF", e.what()};
    }
    return std::nullopt;
  }

  bool finished(TxnId t, const std::string& item) const {
    auto it = s_.txns.find(t);
    return it != s_.txns.end() && it->second.finished.count(item);
  }

  // Acquires mode on item for txn, donating contended items whose holders
  // have finished with them. Returns the blocking holders.
  std::set<TxnId> acquire(TxnId txn, const std::string& item, LockMode mode, const std::set<TxnId>& ignore = {}) {
    if (const LockEntry* e = s_.locks.find(item, txn); e && static_cast<int>(e->mode) >= static_cast<int>(mode))
      return {};
    AcquireResult r = s_.locks.probe(txn, item, mode, ignore);
    if (!r.granted && donates(cfg_.protocol) && cfg_.donation_policy == DonationPolicy::final_access) {
      bool all = std::all_of(r.blockers.begin(), r.blockers.end(), [&](TxnId k) {
        const LockEntry* e = s_.locks.find(item, k);
        return e && e->accessed && e->mode != LockMode::certify && finished(k, item);
      });
      if (all) {
        for (TxnId k : r.blockers) donate(k, item);
        r = s_.locks.probe(txn, item, mode, ignore);
      }
    }
    if (!r.granted) {
      for (TxnId k : r.blockers) s_.wfg.add(txn, k, item, mode);
      return r.blockers;
    }
    s_.locks.acquire(txn, item, mode, ignore);
    s_.txns[txn].acquired.emplace_back(item, mode);
    emit(Operation::step(lock_of(mode), txn, item));
    return {};
  }

  std::optional<Miss> locking_step(const Operation& op, std::optional<TxnId>& version) {
    TxnInfo& me = s_.txns[op.txn];
    if (is_data(op.action) && s_.locks.has_donated(op.txn, op.item))
      throw RuleFailure(rule(1), "t" + std::to_string(op.txn) + " accesses " + op.item + " after donating it");
    try {
      if (op.action == Action::read) {
        if (auto b = acquire(op.txn, op.item, LockMode::read); !b.empty()) return Miss{Decision::Kind::block, b, {}, {}};
        auto v = choose_read_version(op);
        if (!v) return Miss{Decision::Kind::reject, {}, "MAL4", "serialization cycle"};
        version = *v;
        s_.store.touch(op.item);
        emit_read(op, *v);
        s_.locks.mark_accessed(op.txn, op.item);
      } else if (op.action == Action::write) {
        if (auto b = acquire(op.txn, op.item, LockMode::write); !b.empty()) return Miss{Decision::Kind::block, b, {}, {}};
        s_.store.write(op.item, op.txn);
        if (std::find(me.write_order.begin(), me.write_order.end(), op.item) == me.write_order.end())
          me.write_order.push_back(op.item);
        emit(op);
        s_.locks.mark_accessed(op.txn, op.item);
      } else if (op.action == Action::commit) {
        if (certifies(cfg_.protocol)) {
          for (const auto& item : me.write_order) {
            // Readers of this version or of a later one are already ordered
            // after the certifier and need not be waited for.
            std::set<TxnId> ignore;
            if (cfg_.protocol == Protocol::mal) {
              const auto& vs = s_.store.versions(item);
              auto pos = [&](TxnId w) {
                return std::find_if(vs.begin(), vs.end(), [&](const Version& v) { return v.writer == w; }) - vs.begin();
              };
              auto mine = pos(op.txn);
              for (const auto& rr : s_.reads)
                if (rr.item == item && rr.reader != op.txn && (rr.version == op.txn || pos(rr.version) > mine))
                  ignore.insert(rr.reader);
            }
            if (auto b = acquire(op.txn, item, LockMode::certify, ignore); !b.empty())
              return Miss{Decision::Kind::block, b, {}, {}};
          }
        }
        release_and_finish(op);
      } else if (op.action == Action::abort) {
        release_and_finish(op);
      }
    } catch (const LockError& e) {
      throw RuleFailure(rule(1), e.what());
    }
    if (op.last_access && is_data(op.action)) me.finished.insert(op.item);
    if (op.no_more_writes) me.no_more_writes = true;
    if (donates(cfg_.protocol) && s_.donated_ever) {
      if (auto m = wake_violation()) return m;
    }
    if (cfg_.protocol == Protocol::mal && op.action == Action::write && !serializable())
      return Miss{Decision::Kind::reject, {}, "MAL4", "serialization cycle"};
    return std::nullopt;
  }

  void release_and_finish(const Operation& op) {
    TxnInfo& me = s_.txns[op.txn];
    for (const auto& [item, mode] : me.acquired) emit(Operation::step(unlock_of(mode), op.txn, item));
    s_.locks.release_all(op.txn);
    me.acquired.clear();
    emit(op.action == Action::commit ? Operation::commit(op.txn) : Operation::abort(op.txn));
    if (op.action == Action::commit) s_.store.commit(op.txn);
    else {
      s_.store.abort(op.txn);
      me.aborted = true;
      s_.aborted.insert(op.txn);
    }
    me.terminated = true;
    s_.wfg.remove_txn(op.txn);
  }

  bool serializable() const {
    if (s_.aborted.empty()) return !mv_conflict_graph(std::span<const Operation>(s_.data), s_.vf).find_cycle();
    std::vector<Operation> kept;
    VersionFunction vf;
    for (std::size_t i = 0; i < s_.data.size(); ++i) {
      if (s_.aborted.count(s_.data[i].txn)) continue;
      if (auto w = s_.vf.writer_at(i)) vf.assign(kept.size(), *w);
      kept.push_back(s_.data[i]);
    }
    return !mv_conflict_graph(std::span<const Operation>(kept), vf).find_cycle();
  }

  std::optional<TxnId> choose_read_version(const Operation& op) {
    const auto& me = s_.txns[op.txn];
    bool own = std::find(me.write_order.begin(), me.write_order.end(), op.item) != me.write_order.end();
    if (cfg_.protocol == Protocol::two_pl || cfg_.protocol == Protocol::al) return s_.store.latest(op.item);
    if (own) return op.txn;
    if (cfg_.protocol != Protocol::mal) return s_.store.latest_committed(op.item);

    auto fits = [&](TxnId v) {
      s_.data.push_back(op);
      s_.vf.assign(s_.data.size() - 1, v);
      bool ok = serializable();
      s_.data.pop_back();
      s_.vf.erase(s_.data.size());
      return ok;
    };
    if (cfg_.read_donated) {
      TxnId k = s_.store.latest(op.item);
      if (k != kInitialTxn && !s_.store.is_committed(op.item, k) && fits(k)) {
        const LockEntry* e = s_.locks.find(op.item, k);
        if (e && e->donated) {
          s_.store.note_uncommitted_read();
          return k;
        }
        if (e && e->accessed && finished(k, op.item)) {
          donate(k, op.item);
          s_.store.note_uncommitted_read();
          return k;
        }
      }
    }
    const auto& vs = s_.store.versions(op.item);
    for (auto it = vs.rbegin(); it != vs.rend(); ++it)
      if (it->committed && fits(it->writer)) return it->writer;
    return std::nullopt;
  }

  // AL4 / MAL4 over the history so far.
  std::optional<Miss> wake_violation() const {
    const auto& h = s_.hist;
    std::span<const Operation> hs(h);
    ConflictMode mode = *cfg_.indebtedness;
    bool literal = cfg_.protocol == Protocol::al;
    std::set<TxnId> donors, members;
    for (const auto& op : h) {
      members.insert(op.txn);
      if (op.action == Action::donate) donors.insert(op.txn);
    }
    for (TxnId i : donors) {
      std::size_t until = begins_to_unlock(hs, i).value_or(h.size());
      for (TxnId j : members) {
        if (j == i || !is_indebted(hs, j, i, mode)) continue;
        for (std::size_t p = 0; p < until; ++p) {
          if (h[p].txn != j) continue;
          if (!is_data(h[p].action)) continue;
          if (!literal) {
            bool clash = false;
            for (std::size_t q = 0; q < h.size() && !clash; ++q)
              if (h[q].txn == i && q != p)
                clash = q < p ? conflicts(h[q], h[p], mode) : conflicts(h[p], h[q], mode);
            if (!clash) continue;
          }
          if (in_wake(hs, p, i)) continue;
          return Miss{Decision::Kind::reject, {i}, rule(4),
                      "t" + std::to_string(j) + " is indebted to t" + std::to_string(i) + " but " +
                          format_operation(h[p]) + " is outside its wake"};
        }
      }
    }
    return std::nullopt;
  }

  std::uint64_t ts_of(TxnId t) const {
    if (t == kInitialTxn) return 0;
    auto it = s_.txns.find(t);
    return it == s_.txns.end() ? 0 : it->second.ts;
  }

 public:
  std::optional<TxnId> late_reader(TxnId txn, const std::string& item) const {
    std::uint64_t mine = ts_of(txn);
    for (const auto& rr : s_.reads) {
      if (rr.item != item || s_.aborted.count(rr.reader)) continue;
      if (ts_of(rr.reader) > mine && ts_of(rr.version) < mine) return rr.reader;
    }
    return std::nullopt;
  }

  GateResult gate(TxnId txn) const {
    GateResult g;
    auto it = s_.txns.find(txn);
    if (it == s_.txns.end()) return g;
    for (TxnId w : it->second.read_uncommitted_from) {
      const auto& wi = s_.txns.at(w);
      if (wi.terminated || wi.no_more_writes) continue;
      g.on.insert(w);
    }
    if (!g.on.empty()) g.gate = CommitGate::wait;
    return g;
  }

 private:
  std::optional<Miss> mvto_step(const Operation& op, std::optional<TxnId>& version) {
    TxnInfo& me = s_.txns[op.txn];
    bool hybrid = cfg_.protocol == Protocol::mal_mvto;
    if (op.action == Action::read) {
      const auto& vs = s_.store.versions(op.item);
      std::uint64_t mine = me.ts;
      const Version* target = nullptr;
      for (const auto& v : vs)
        if (ts_of(v.writer) <= mine && (!target || ts_of(v.writer) > ts_of(target->writer))) target = &v;
      TxnId w = target->writer;
      bool uncommitted = !target->committed && w != op.txn;
      if (uncommitted) {
        const TxnInfo& wi = s_.txns.at(w);
        bool released = wi.finished.count(op.item) || wi.no_more_writes;
        if (!hybrid || !released) {
          s_.wfg.add(op.txn, w, op.item, LockMode::read);
          return Miss{Decision::Kind::block, {w}, {}, "version " + op.item + std::to_string(w) + " is uncommitted"};
        }
        bool already = std::any_of(s_.hist.begin(), s_.hist.end(), [&](const Operation& h) {
          return h.action == Action::donate && h.txn == w && h.item == op.item;
        });
        if (!already) emit(Operation::step(Action::donate, w, op.item));
        me.read_uncommitted_from.insert(w);
        s_.store.note_uncommitted_read();
      }
      s_.store.touch(op.item);
      version = w;
      emit_read(op, w);
    } else if (op.action == Action::write) {
      if (auto k = late_reader(op.txn, op.item))
        return Miss{Decision::Kind::abort, {}, "MVTO-late-writer",
                    "t" + std::to_string(*k) + " already read an older version of " + op.item};
      s_.store.write(op.item, op.txn);
      if (std::find(me.write_order.begin(), me.write_order.end(), op.item) == me.write_order.end())
        me.write_order.push_back(op.item);
      emit(op);
    } else if (op.action == Action::commit) {
      // Plain MVTO reads committed versions only, so the gate is a no-op there.
      GateResult g = gate(op.txn);
      if (g.gate == CommitGate::wait) {
        for (TxnId w : g.on) s_.wfg.add(op.txn, w, "", LockMode::read);
        return Miss{Decision::Kind::block, g.on, {}, "read uncommitted versions"};
      }
      emit(op);
      s_.store.commit(op.txn);
      me.terminated = true;
      s_.wfg.remove_txn(op.txn);
    } else if (op.action == Action::abort) {
      emit(op);
      s_.store.abort(op.txn);
      me.terminated = me.aborted = true;
      s_.aborted.insert(op.txn);
      s_.wfg.remove_txn(op.txn);
    }
    if (op.last_access && is_data(op.action)) me.finished.insert(op.item);
    if (op.no_more_writes) me.no_more_writes = true;
    return std::nullopt;
  }

  const SchedulerConfig& cfg_;
  State& s_;
  std::vector<Operation>& emitted_;
};

}  // namespace

Scheduler::Scheduler(SchedulerConfig cfg) : cfg_(validated(cfg)), state_(std::make_unique<State>()) {
  state_->locks = LockTable(semantics_of(cfg_.protocol));
  state_->store = VersionStore(is_multiversion(cfg_.protocol), cfg_.max_versions);
}

Scheduler::~Scheduler() = default;
Scheduler::Scheduler(Scheduler&&) noexcept = default;
Scheduler& Scheduler::operator=(Scheduler&&) noexcept = default;

const SchedulerConfig& Scheduler::config() const { return cfg_; }

Decision Scheduler::submit(const Operation& op) {
  if (is_lock(op.action) || is_unlock(op.action))
    throw std::invalid_argument("lock steps are synthesized, not submitted: " + format_operation(op));
  if (op.txn == kInitialTxn) throw std::invalid_argument("transaction id 0 is reserved");
  TxnInfo& info = state_->txns[op.txn];
  if (info.terminated) throw std::logic_error("t" + std::to_string(op.txn) + " has already terminated");
  if (info.ts == 0) info.ts = state_->next_ts++;

  State trial = *state_;
  Decision d;
  std::optional<Miss> miss;
  std::optional<TxnId> version;
  try {
    Engine engine(cfg_, trial, d.emitted);
    miss = engine.step(op, version);
  } catch (const RuleFailure& f) {
    miss = Miss{Decision::Kind::reject, {}, f.rule, f.what()};
  }
  if (!miss) {
    d.version = version;
    trial.wfg.clear_waiter(op.txn);
    *state_ = std::move(trial);
    return d;
  }
  d.emitted.clear();
  d.kind = miss->kind;
  d.on = miss->on;
  d.rule = miss->rule;
  d.reason = miss->reason;
  if (miss->kind == Decision::Kind::block) {
    // Keep the waits-for edges recorded by the failed attempt.
    state_->wfg.clear_waiter(op.txn);
    for (const auto& e : trial.wfg.edges())
      if (e.waiter == op.txn) state_->wfg.add(e.waiter, e.holder, e.item, e.mode);
  }
  if (miss->kind == Decision::Kind::abort) {
    return abort_txn(op.txn, miss->rule, miss->reason);
  }
  return d;
}

Decision Scheduler::abort_txn(TxnId txn, const std::string& rule, const std::string& reason) {
  Decision d;
  d.kind = Decision::Kind::abort;
  d.aborted = txn;
  d.rule = rule;
  d.reason = reason;
  State& s = *state_;
  TxnInfo& info = s.txns[txn];
  if (info.terminated) return d;
  for (const auto& [item, mode] : info.acquired) {
    Operation u = Operation::step(unlock_of(mode), txn, item);
    s.hist.push_back(u);
    d.emitted.push_back(u);
  }
  info.acquired.clear();
  s.locks.release_all(txn);
  Operation a = Operation::abort(txn);
  s.hist.push_back(a);
  s.data.push_back(a);
  d.emitted.push_back(a);
  s.store.abort(txn);
  info.terminated = info.aborted = true;
  s.aborted.insert(txn);
  s.wfg.remove_txn(txn);
  return d;
}

std::optional<TxnId> Scheduler::mvto_write_check(TxnId txn, const std::string& item) const {
  std::vector<Operation> sink;
  Engine e(cfg_, *state_, sink);
  return e.late_reader(txn, item);
}

GateResult Scheduler::hybrid_commit_gate(TxnId txn) const {
  std::vector<Operation> sink;
  Engine e(cfg_, *state_, sink);
  return e.gate(txn);
}

VersionStats Scheduler::version_stats() const { return state_->store.stats(); }
const std::vector<Operation>& Scheduler::history() const { return state_->hist; }
const VersionFunction& Scheduler::version_function() const { return state_->vf; }
const WaitsForGraph& Scheduler::waits_for() const { return state_->wfg; }
const LockTable& Scheduler::locks() const { return state_->locks; }

bool Scheduler::terminated(TxnId txn) const {
  auto it = state_->txns.find(txn);
  return it != state_->txns.end() && it->second.terminated;
}

std::optional<std::uint64_t> Scheduler::timestamp(TxnId txn) const {
  auto it = state_->txns.find(txn);
  if (it == state_->txns.end() || it->second.ts == 0) return std::nullopt;
  return it->second.ts;
}

RunOutcome run(const SchedulerConfig& cfg, const Schedule& input, const RunOptions& opts) {
  Scheduler sched(cfg);
  RunOutcome out;
  bool immediate = true;
  bool deadlocked = false;
  std::deque<Operation> queue;
  std::set<TxnId> dead;  // aborted or permanently rejected

  auto trace = [&](const Operation& op, Decision d) { out.trace.push_back({out.trace.size() + 1, op, std::move(d)}); };

  auto drop_queued = [&](TxnId t) { std::erase_if(queue, [&](const Operation& q) { return q.txn == t; }); };

  auto handle_miss = [&](const Operation& op, const Decision& d) {
    if (d.kind == Decision::Kind::abort) {
      dead.insert(d.aborted);
      drop_queued(d.aborted);
    } else if (d.kind == Decision::Kind::reject && (d.rule == "AL1" || d.rule == "MAL1" || d.rule == "WF")) {
      dead.insert(op.txn);
      drop_queued(op.txn);
    }
  };

  auto check_deadlock = [&]() {
    auto cycle = detect_deadlock(sched.waits_for());
    if (!cycle) return false;
    if (!deadlocked) out.deadlock_cycle = cycle;
    deadlocked = true;
    if (cfg.deadlock_action != DeadlockAction::abort_youngest) return false;
    TxnId victim = *std::max_element(cycle->begin(), cycle->end(), [&](TxnId a, TxnId b) {
      return sched.timestamp(a).value_or(0) < sched.timestamp(b).value_or(0);
    });
    Decision d = sched.abort_txn(victim, "deadlock", "youngest member of the cycle");
    trace(Operation::abort(victim), d);
    dead.insert(victim);
    drop_queued(victim);
    return true;
  };

  auto retry = [&]() {
    bool progress = true;
    while (progress) {
      progress = false;
      std::set<TxnId> seen;
      for (auto it = queue.begin(); it != queue.end(); ++it) {
        if (!seen.insert(it->txn).second) continue;  // only the head op of each txn
        Operation op = *it;
        Decision d = sched.submit(op);
        if (d.executed()) {
          queue.erase(it);
          trace(op, std::move(d));
          progress = true;
          break;
        }
        if (d.kind == Decision::Kind::abort || d.kind == Decision::Kind::reject) {
          bool permanent = d.kind == Decision::Kind::abort || d.rule == "AL1" || d.rule == "MAL1";
          if (permanent) {
            trace(op, d);
            handle_miss(op, d);
            progress = true;
            break;
          }
        }
        if (d.kind == Decision::Kind::block && check_deadlock()) {
          progress = true;
          break;
        }
      }
    }
  };

  for (const auto& op : input.ops()) {
    if (is_lock(op.action) || is_unlock(op.action)) continue;
    if (dead.count(op.txn) || sched.terminated(op.txn)) {
      Decision d;
      d.kind = Decision::Kind::skip;
      trace(op, d);
      immediate = false;
      continue;
    }
    if (std::any_of(queue.begin(), queue.end(), [&](const Operation& q) { return q.txn == op.txn; })) {
      Decision d;
      d.kind = Decision::Kind::queued;
      trace(op, d);
      queue.push_back(op);
      immediate = false;
      continue;
    }
    Decision d = sched.submit(op);
    bool executed = d.executed();
    Decision::Kind kind = d.kind;
    trace(op, d);
    if (executed) {
      retry();
      continue;
    }
    immediate = false;
    if (opts.stop_at_first_miss) break;
    if (kind == Decision::Kind::block || (kind == Decision::Kind::reject && d.rule != "AL1" && d.rule != "MAL1" && d.rule != "WF")) {
      queue.push_back(op);
      if (kind == Decision::Kind::block && check_deadlock()) retry();
    } else {
      handle_miss(op, d);
      retry();
    }
  }

  out.status = immediate ? RunStatus::accepted : deadlocked ? RunStatus::deadlock : RunStatus::not_generated;
  out.history = Schedule(sched.history());
  out.vf = sched.version_function();
  for (const auto& op : sched.history())
    if (op.action == Action::abort) out.aborted.insert(op.txn);
  out.stats = sched.version_stats();
  return out;
}

}  // namespace malkit
