#include "malkit/oracles.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace malkit {

std::string_view kind_name(ConflictKind k) {
  switch (k) {
    case ConflictKind::rw: return "rw";
    case ConflictKind::wr: return "wr";
    case ConflictKind::ww: return "ww";
  }
  return "?";
}

void ConflictGraph::add_edge(TxnId from, TxnId to, ConflictKind kind) {
  if (from == to) return;
  nodes_.insert(from);
  nodes_.insert(to);
  edges_[{from, to}].insert(kind);
}

std::optional<std::vector<TxnId>> ConflictGraph::find_cycle() const {
  std::map<TxnId, std::vector<TxnId>> adj;
  for (const auto& [e, kinds] : edges_) adj[e.first].push_back(e.second);
  enum Color { white, grey, black };
  std::map<TxnId, Color> color;
  std::vector<TxnId> stack;
  std::optional<std::vector<TxnId>> found;

  std::function<bool(TxnId)> dfs = [&](TxnId u) {
    color[u] = grey;
    stack.push_back(u);
    for (TxnId v : adj[u]) {
      if (color[v] == grey) {
        auto it = std::find(stack.begin(), stack.end(), v);
        found = std::vector<TxnId>(it, stack.end());
        return true;
      }
      if (color[v] == white && dfs(v)) return true;
    }
    stack.pop_back();
    color[u] = black;
    return false;
  };
  for (TxnId n : nodes_)
    if (color[n] == white && dfs(n)) break;
  if (found) std::rotate(found->begin(), std::min_element(found->begin(), found->end()), found->end());
  return found;
}

std::optional<std::vector<TxnId>> ConflictGraph::topological_order() const {
  std::map<TxnId, int> indeg;
  for (TxnId n : nodes_) indeg[n] = 0;
  for (const auto& [e, k] : edges_) ++indeg[e.second];
  std::set<TxnId> ready;
  for (const auto& [n, d] : indeg)
    if (d == 0) ready.insert(n);
  std::vector<TxnId> order;
  while (!ready.empty()) {
    TxnId u = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(u);
    for (auto it = edges_.lower_bound({u, 0}); it != edges_.end() && it->first.first == u; ++it)
      if (--indeg[it->first.second] == 0) ready.insert(it->first.second);
  }
  if (order.size() != nodes_.size()) return std::nullopt;
  return order;
}

std::string format_verdict(const ClassVerdict& v) {
  std::string out = v.name + (v.member ? " member" : " non-member");
  if (v.witness_kind == ClassVerdict::Witness::none) return out;
  out += v.witness_kind == ClassVerdict::Witness::cycle ? " cycle " : " order ";
  for (std::size_t i = 0; i < v.witness.size(); ++i) {
    if (i) out += v.witness_kind == ClassVerdict::Witness::cycle ? "->" : ",";
    out += "t" + std::to_string(v.witness[i]);
  }
  if (v.witness_kind == ClassVerdict::Witness::cycle && !v.witness.empty())
    out += "->t" + std::to_string(v.witness.front());
  return out;
}

namespace {

ClassVerdict verdict_from_graph(std::string name, const ConflictGraph& g) {
  ClassVerdict v;
  v.name = std::move(name);
  if (auto order = g.topological_order()) {
    v.member = true;
    v.witness_kind = ClassVerdict::Witness::serial_order;
    v.witness = *order;
  } else {
    v.witness_kind = ClassVerdict::Witness::cycle;
    v.witness = *g.find_cycle();
  }
  return v;
}

void check_bounds(const Schedule& s, const OracleBounds& b) {
  std::size_t data = 0;
  for (const auto& op : s.ops()) data += is_data(op.action);
  if (s.txns().size() > b.max_txns)
    throw BoundExceeded(std::to_string(s.txns().size()) + " transactions exceed the bound of " +
                        std::to_string(b.max_txns));
  if (data > b.max_ops)
    throw BoundExceeded(std::to_string(data) + " operations exceed the bound of " + std::to_string(b.max_ops));
}

// Identifies a read by (txn, index among that txn's data steps) so it can be
// matched between a schedule and a serial reordering of it.
using StepKey = std::pair<TxnId, std::size_t>;

// Serial monoversion execution of `order`: reads-from per step plus final writers.
struct SerialView {
  std::map<StepKey, TxnId> reads;
  std::map<std::string, TxnId> final_writer;
};

SerialView serial_view(const std::map<TxnId, std::vector<const Operation*>>& programs,
                       const std::vector<TxnId>& order) {
  SerialView view;
  std::map<std::string, TxnId> last;
  for (TxnId t : order) {
    std::size_t idx = 0;
    for (const Operation* op : programs.at(t)) {
      if (op->action == Action::read) {
        auto it = last.find(op->item);
        view.reads[{t, idx}] = it == last.end() ? kInitialTxn : it->second;
      } else {
        last[op->item] = t;
      }
      ++idx;
    }
  }
  view.final_writer = last;
  return view;
}

std::map<TxnId, std::vector<const Operation*>> programs_of(const Schedule& s) {
  std::map<TxnId, std::vector<const Operation*>> programs;
  for (TxnId t : s.txns()) programs[t];
  for (const auto& op : s.ops())
    if (is_data(op.action)) programs[op.txn].push_back(&op);
  return programs;
}

// Reads-from of `s` keyed by step, using `vf` (positions refer to `s`).
std::map<StepKey, TxnId> keyed_reads(const Schedule& s, const VersionFunction& vf) {
  std::map<StepKey, TxnId> out;
  std::map<TxnId, std::size_t> counter;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& op = s[i];
    if (!is_data(op.action)) continue;
    std::size_t idx = counter[op.txn]++;
    if (op.action == Action::read) out[{op.txn, idx}] = *vf.writer_at(i);
  }
  return out;
}

// Restricts a version function of `s` to the committed projection `p`.
VersionFunction project_vf(const Schedule& s, const Schedule& p, const VersionFunction& vf) {
  if (s.size() == p.size()) return vf;
  auto aborted = s.aborted();
  VersionFunction out;
  std::size_t j = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (aborted.count(s[i].txn)) continue;
    if (auto w = vf.writer_at(i)) out.assign(j, aborted.count(*w) ? kInitialTxn : *w);
    ++j;
  }
  return out;
}

}  // namespace

std::vector<ConflictPair> conflict_pairs(const Schedule& s) {
  std::vector<ConflictPair> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& a = s[i];
    if (!is_data(a.action)) continue;
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      const auto& b = s[j];
      if (!is_data(b.action) || b.txn == a.txn || b.item != a.item) continue;
      if (a.action == Action::read && b.action == Action::read) continue;
      ConflictKind k = a.action == Action::read ? ConflictKind::rw
                       : b.action == Action::read ? ConflictKind::wr
                                                  : ConflictKind::ww;
      out.push_back({i, j, k});
    }
  }
  return out;
}

ConflictGraph conflict_graph(const Schedule& s) {
  ConflictGraph g;
  for (TxnId t : s.txns()) g.add_node(t);
  for (const auto& p : conflict_pairs(s)) g.add_edge(s[p.first].txn, s[p.second].txn, p.kind);
  return g;
}

ClassVerdict is_csr(const Schedule& s) { return verdict_from_graph("csr", conflict_graph(committed_projection(s))); }

ClassVerdict is_vsr(const Schedule& raw, const OracleBounds& bounds) {
  Schedule s = committed_projection(raw);
  check_bounds(s, bounds);
  auto programs = programs_of(s);
  auto target_reads = keyed_reads(s, last_writer_vf(s));
  std::map<std::string, TxnId> target_final;
  for (const auto& op : s.ops())
    if (op.action == Action::write) target_final[op.item] = op.txn;

  std::vector<TxnId> order(s.txns().begin(), s.txns().end());
  ClassVerdict v{"vsr", false, ClassVerdict::Witness::none, {}};
  do {
    auto view = serial_view(programs, order);
    if (view.reads == target_reads && view.final_writer == target_final) {
      v.member = true;
      v.witness_kind = ClassVerdict::Witness::serial_order;
      v.witness = order;
      return v;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return v;
}

ConflictGraph mv_conflict_graph(std::span<const Operation> ops, const VersionFunction& vf) {
  ConflictGraph g;
  // Position of each writer's last write per item: the version order.
  std::map<std::string, std::map<TxnId, std::size_t>> version_pos;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (is_data(ops[i].action) || is_terminal(ops[i].action)) g.add_node(ops[i].txn);
    if (ops[i].action == Action::write) version_pos[ops[i].item][ops[i].txn] = i;
  }

  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto& op = ops[i];
    if (op.action != Action::read) continue;
    TxnId reader = op.txn;
    TxnId source = *vf.writer_at(i);
    if (source == reader) continue;
    if (source != kInitialTxn) g.add_edge(source, reader, ConflictKind::wr);
    const auto& writers = version_pos[op.item];
    bool source_is_initial = source == kInitialTxn;
    std::size_t source_pos = source_is_initial ? 0 : writers.at(source);
    for (const auto& [k, kpos] : writers) {
      if (k == reader || k == source) continue;
      if (source_is_initial || kpos > source_pos) g.add_edge(reader, k, ConflictKind::rw);
      else g.add_edge(k, source, ConflictKind::ww);
    }
  }
  return g;
}

ConflictGraph mv_conflict_graph(const Schedule& raw, const VersionFunction& raw_vf) {
  validate(raw, raw_vf);
  Schedule s = committed_projection(raw);
  ConflictGraph g = mv_conflict_graph(std::span<const Operation>(s.ops()), project_vf(raw, s, raw_vf));
  for (TxnId t : s.txns()) g.add_node(t);
  return g;
}

ClassVerdict is_mvcsr(const Schedule& s, const VersionFunction& vf) {
  return verdict_from_graph("mvcsr", mv_conflict_graph(s, vf));
}

ClassVerdict is_mvsr(const Schedule& raw, const VersionFunction& raw_vf, const OracleBounds& bounds) {
  validate(raw, raw_vf);
  Schedule s = committed_projection(raw);
  check_bounds(s, bounds);
  VersionFunction vf = project_vf(raw, s, raw_vf);
  auto programs = programs_of(s);
  auto target = keyed_reads(s, vf);
  std::vector<TxnId> order(s.txns().begin(), s.txns().end());
  ClassVerdict v{"mvsr", false, ClassVerdict::Witness::none, {}};
  do {
    if (serial_view(programs, order).reads == target) {
      v.member = true;
      v.witness_kind = ClassVerdict::Witness::serial_order;
      v.witness = order;
      return v;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return v;
}

ClassVerdict is_mvsr_by_version_order(const Schedule& raw, const VersionFunction& raw_vf,
                                      const OracleBounds& bounds) {
  validate(raw, raw_vf);
  Schedule s = committed_projection(raw);
  check_bounds(s, bounds);
  VersionFunction vf = project_vf(raw, s, raw_vf);

  std::map<std::string, std::vector<TxnId>> writers;
  for (const auto& op : s.ops())
    if (op.action == Action::write) {
      auto& w = writers[op.item];
      if (std::find(w.begin(), w.end(), op.txn) == w.end()) w.push_back(op.txn);
    }
  struct Read {
    TxnId reader;
    std::string item;
    TxnId source;
  };
  std::vector<Read> reads;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i].action == Action::read && *vf.writer_at(i) != s[i].txn)
      reads.push_back({s[i].txn, s[i].item, *vf.writer_at(i)});

  std::vector<std::string> items;
  for (auto& [item, w] : writers) {
    std::sort(w.begin(), w.end());
    items.push_back(item);
  }

  ClassVerdict v{"mvsr", false, ClassVerdict::Witness::none, {}};
  // Odometer over the permutations of every item's writers.
  std::function<bool(std::size_t)> search = [&](std::size_t idx) -> bool {
    if (idx < items.size()) {
      auto& w = writers[items[idx]];
      std::sort(w.begin(), w.end());
      do {
        if (search(idx + 1)) return true;
      } while (std::next_permutation(w.begin(), w.end()));
      return false;
    }
    ConflictGraph g;
    for (TxnId t : s.txns()) g.add_node(t);
    for (const auto& r : reads) {
      if (r.source != kInitialTxn) g.add_edge(r.source, r.reader, ConflictKind::wr);
      const auto& order = writers[r.item];
      auto rank = [&](TxnId t) {
        return t == kInitialTxn ? std::ptrdiff_t{-1}
                                : std::find(order.begin(), order.end(), t) - order.begin();
      };
      for (TxnId k : order) {
        if (k == r.reader || k == r.source) continue;
        if (rank(k) < rank(r.source)) g.add_edge(k, r.source, ConflictKind::ww);
        else g.add_edge(r.reader, k, ConflictKind::rw);
      }
    }
    if (auto order = g.topological_order()) {
      v.member = true;
      v.witness_kind = ClassVerdict::Witness::serial_order;
      v.witness = *order;
      return true;
    }
    return false;
  };
  search(0);
  return v;
}

}  // namespace malkit
