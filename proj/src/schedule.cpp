#include "malkit/schedule.hpp"

#include <algorithm>
#include <cctype>

namespace malkit {

bool is_data(Action a) { return a == Action::read || a == Action::write; }
bool is_terminal(Action a) { return a == Action::commit || a == Action::abort; }
bool is_lock(Action a) {
  return a == Action::read_lock || a == Action::write_lock || a == Action::certify_lock;
}
bool is_unlock(Action a) {
  return a == Action::read_unlock || a == Action::write_unlock || a == Action::certify_unlock;
}

std::string_view action_token(Action a) {
  switch (a) {
    case Action::read: return "r";
    case Action::write: return "w";
    case Action::commit: return "c";
    case Action::abort: return "a";
    case Action::read_lock: return "rl";
    case Action::write_lock: return "wl";
    case Action::certify_lock: return "cl";
    case Action::read_unlock: return "ru";
    case Action::write_unlock: return "wu";
    case Action::certify_unlock: return "cu";
    case Action::donate: return "d";
  }
  return "?";
}

Operation Operation::read(TxnId t, std::string item, std::optional<TxnId> version) {
  Operation op;
  op.action = Action::read;
  op.txn = t;
  op.item = std::move(item);
  op.version = version;
  return op;
}

Operation Operation::write(TxnId t, std::string item) { return step(Action::write, t, std::move(item)); }

Operation Operation::commit(TxnId t) { return step(Action::commit, t, {}); }

Operation Operation::abort(TxnId t) { return step(Action::abort, t, {}); }

Operation Operation::step(Action a, TxnId t, std::string item) {
  Operation op;
  op.action = a;
  op.txn = t;
  op.item = std::move(item);
  return op;
}

bool Operation::same_step(const Operation& other) const {
  return action == other.action && txn == other.txn && item == other.item;
}

ParseError::ParseError(std::size_t offset, const std::string& what)
    : std::runtime_error("offset " + std::to_string(offset) + ": " + what), offset_(offset) {}

Schedule::Schedule(std::vector<Operation> ops) : ops_(std::move(ops)) {
  std::set<TxnId> terminated;
  for (const auto& op : ops_) {
    if (op.txn == kInitialTxn) throw std::invalid_argument("transaction id 0 is reserved");
    if (terminated.count(op.txn))
      throw std::invalid_argument("t" + std::to_string(op.txn) + " has a step after its commit/abort");
    if (is_terminal(op.action)) {
      if (!op.item.empty() || op.version) throw std::invalid_argument("commit/abort carries no item");
      terminated.insert(op.txn);
    } else if (op.item.empty()) {
      throw std::invalid_argument("step without an item");
    }
    if (op.version && op.action != Action::read)
      throw std::invalid_argument("version tags appear only on reads");
    txns_.insert(op.txn);
  }
}

std::set<std::string> Schedule::items() const {
  std::set<std::string> out;
  for (const auto& op : ops_)
    if (!op.item.empty()) out.insert(op.item);
  return out;
}

std::set<TxnId> Schedule::committed() const {
  std::set<TxnId> out;
  for (const auto& op : ops_)
    if (op.action == Action::commit) out.insert(op.txn);
  return out;
}

std::set<TxnId> Schedule::aborted() const {
  std::set<TxnId> out;
  for (const auto& op : ops_)
    if (op.action == Action::abort) out.insert(op.txn);
  return out;
}

std::vector<std::size_t> Schedule::positions_of(TxnId t) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ops_.size(); ++i)
    if (ops_[i].txn == t && is_data(ops_[i].action)) out.push_back(i);
  return out;
}

bool Schedule::has_lock_steps() const {
  return std::any_of(ops_.begin(), ops_.end(), [](const Operation& op) {
    return !is_data(op.action) && !is_terminal(op.action);
  });
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Schedule run() {
    std::vector<Operation> ops;
    std::set<TxnId> terminated;
    skip_space();
    while (pos_ < text_.size()) {
      std::size_t start = pos_;
      Operation op = parse_op();
      if (terminated.count(op.txn)) {
        if (is_terminal(op.action))
          throw ParseError(start, "duplicate commit/abort for t" + std::to_string(op.txn));
        throw ParseError(start, "step of t" + std::to_string(op.txn) + " after its commit/abort");
      }
      if (is_terminal(op.action)) terminated.insert(op.txn);
      ops.push_back(std::move(op));
      skip_space();
    }
    return Schedule(std::move(ops));
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool at_lower() const { return pos_ < text_.size() && std::islower(static_cast<unsigned char>(text_[pos_])); }
  bool at_digit() const { return pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])); }

  Action parse_action() {
    std::size_t start = pos_;
    // Action words are one or two letters; the txn id follows immediately.
    while (at_lower() && pos_ - start < 2) ++pos_;
    std::string_view word = text_.substr(start, pos_ - start);
    static const std::pair<std::string_view, Action> kWords[] = {
        {"rl", Action::read_lock},      {"wl", Action::write_lock},    {"cl", Action::certify_lock},
        {"ru", Action::read_unlock},    {"wu", Action::write_unlock},  {"cu", Action::certify_unlock},
        {"r", Action::read},            {"w", Action::write},          {"c", Action::commit},
        {"a", Action::abort},           {"d", Action::donate},
    };
    for (const auto& [w, a] : kWords)
      if (w == word) return a;
    // "c1" / "a1" followed by a letter run is not legal; try a one-letter prefix.
    if (word.size() == 2) {
      pos_ = start + 1;
      for (const auto& [w, a] : kWords)
        if (w == word.substr(0, 1)) return a;
    }
    throw ParseError(start, "unknown action");
  }

  TxnId parse_txn() {
    if (!at_digit() || text_[pos_] == '0') throw ParseError(pos_, "expected transaction id");
    std::uint64_t v = 0;
    while (at_digit()) {
      v = v * 10 + static_cast<std::uint64_t>(text_[pos_] - '0');
      if (v > 0xffffffffu) throw ParseError(pos_, "transaction id too large");
      ++pos_;
    }
    return static_cast<TxnId>(v);
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) throw ParseError(pos_, std::string("expected '") + c + "'");
    ++pos_;
  }

  Operation parse_op() {
    Operation op;
    op.action = parse_action();
    op.txn = parse_txn();
    if (!is_terminal(op.action)) {
      expect('(');
      std::size_t item_start = pos_;
      while (at_lower()) ++pos_;
      if (pos_ == item_start) throw ParseError(pos_, "expected item name");
      op.item = std::string(text_.substr(item_start, pos_ - item_start));
      if (at_digit()) {
        std::size_t vstart = pos_;
        if (op.action != Action::read) throw ParseError(vstart, "version tag on a non-read step");
        std::uint64_t v = 0;
        while (at_digit()) {
          v = v * 10 + static_cast<std::uint64_t>(text_[pos_] - '0');
          if (v > 0xffffffffu) throw ParseError(vstart, "version tag too large");
          ++pos_;
        }
        op.version = static_cast<TxnId>(v);
      }
      expect(')');
      while (pos_ < text_.size() && (text_[pos_] == '!' || text_[pos_] == '~')) {
        if (!is_data(op.action)) throw ParseError(pos_, "hints apply to reads and writes only");
        if (text_[pos_] == '!') op.last_access = true;
        else op.no_more_writes = true;
        ++pos_;
      }
    }
    return op;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Schedule parse_schedule(std::string_view text) {
  try {
    return Parser(text).run();
  } catch (const std::invalid_argument& e) {
    throw ParseError(text.size(), e.what());
  }
}

std::string format_operation(const Operation& op) {
  std::string out(action_token(op.action));
  out += std::to_string(op.txn);
  if (!is_terminal(op.action)) {
    out += '(';
    out += op.item;
    if (op.version) out += std::to_string(*op.version);
    out += ')';
    if (op.last_access) out += '!';
    if (op.no_more_writes) out += '~';
  }
  return out;
}

std::string format_schedule(const Schedule& s) {
  std::string out;
  for (const auto& op : s.ops()) out += format_operation(op);
  return out;
}

Schedule data_projection(const Schedule& h) {
  std::vector<Operation> ops;
  for (const auto& op : h.ops())
    if (is_data(op.action) || is_terminal(op.action)) ops.push_back(op);
  return Schedule(std::move(ops));
}

Schedule committed_projection(const Schedule& s) {
  auto aborted = s.aborted();
  if (aborted.empty()) return s;
  std::vector<Operation> ops;
  for (const auto& op : s.ops())
    if (!aborted.count(op.txn)) ops.push_back(op);
  return Schedule(std::move(ops));
}

Schedule strip_annotations(const Schedule& s) {
  std::vector<Operation> ops = s.ops();
  for (auto& op : ops) {
    op.last_access = false;
    op.no_more_writes = false;
    op.version.reset();
  }
  return Schedule(std::move(ops));
}

std::optional<TxnId> VersionFunction::writer_at(std::size_t pos) const {
  auto it = assignment_.find(pos);
  if (it == assignment_.end()) return std::nullopt;
  return it->second;
}

VersionFunction last_writer_vf(const Schedule& s) {
  VersionFunction vf;
  std::map<std::string, TxnId> last;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& op = s[i];
    if (op.action == Action::read) {
      auto it = last.find(op.item);
      vf.assign(i, it == last.end() ? kInitialTxn : it->second);
    } else if (op.action == Action::write) {
      last[op.item] = op.txn;
    }
  }
  return vf;
}

VersionFunction committed_read_vf(const Schedule& s) {
  VersionFunction vf;
  // Per item, writers in write order (position of their latest write so far).
  std::map<std::string, std::vector<TxnId>> order;
  std::set<TxnId> committed;
  std::map<TxnId, std::set<std::string>> own;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& op = s[i];
    switch (op.action) {
      case Action::read: {
        if (own[op.txn].count(op.item)) {
          vf.assign(i, op.txn);
          break;
        }
        TxnId chosen = kInitialTxn;
        const auto& writers = order[op.item];
        for (auto it = writers.rbegin(); it != writers.rend(); ++it)
          if (committed.count(*it)) {
            chosen = *it;
            break;
          }
        vf.assign(i, chosen);
        break;
      }
      case Action::write: {
        auto& writers = order[op.item];
        writers.erase(std::remove(writers.begin(), writers.end(), op.txn), writers.end());
        writers.push_back(op.txn);
        own[op.txn].insert(op.item);
        break;
      }
      case Action::commit:
        committed.insert(op.txn);
        break;
      case Action::abort:
        for (auto& [item, writers] : order)
          writers.erase(std::remove(writers.begin(), writers.end(), op.txn), writers.end());
        break;
      default:
        break;
    }
  }
  return vf;
}

VersionFunction tagged_vf(const Schedule& s, const VersionFunction& fallback) {
  VersionFunction vf;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& op = s[i];
    if (op.action != Action::read) continue;
    if (op.version) vf.assign(i, *op.version);
    else if (auto w = fallback.writer_at(i)) vf.assign(i, *w);
  }
  return vf;
}

void validate(const Schedule& s, const VersionFunction& vf) {
  std::map<std::string, std::set<TxnId>> written;
  std::size_t reads = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& op = s[i];
    if (op.action == Action::write) written[op.item].insert(op.txn);
    if (op.action != Action::read) continue;
    ++reads;
    auto w = vf.writer_at(i);
    if (!w) throw InvalidVersionFunction("read at position " + std::to_string(i) + " has no version");
    const auto& prior = written[op.item];
    if (*w != kInitialTxn && !prior.count(*w))
      throw InvalidVersionFunction("read at position " + std::to_string(i) + " observes t" + std::to_string(*w) +
                                   " which has not written " + op.item);
    if (prior.count(op.txn) && *w != op.txn)
      throw InvalidVersionFunction("read at position " + std::to_string(i) + " must observe its own write");
  }
  for (const auto& [pos, w] : vf.assignment()) {
    (void)w;
    if (pos >= s.size() || s[pos].action != Action::read)
      throw InvalidVersionFunction("assignment at position " + std::to_string(pos) + " is not a read");
  }
  (void)reads;
}

std::set<ReadFrom> reads_from(const Schedule& s, const std::optional<VersionFunction>& given) {
  VersionFunction vf = given ? *given : last_writer_vf(s);
  if (given) validate(s, vf);
  std::set<ReadFrom> out;
  for (const auto& [pos, writer] : vf.assignment()) out.insert({s[pos].txn, s[pos].item, writer});
  return out;
}

}  // namespace malkit
