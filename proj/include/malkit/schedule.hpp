#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace malkit {

/// Transaction identifier. 0 is the fictitious transaction that wrote the
/// initial version of every item.
using TxnId = std::uint32_t;
inline constexpr TxnId kInitialTxn = 0;

enum class Action : std::uint8_t {
  read,
  write,
  commit,
  abort,
  read_lock,
  write_lock,
  certify_lock,
  read_unlock,
  write_unlock,
  certify_unlock,
  donate,
};

bool is_data(Action a);
bool is_terminal(Action a);
bool is_lock(Action a);
bool is_unlock(Action a);
std::string_view action_token(Action a);

struct Operation {
  Action action = Action::read;
  TxnId txn = 0;
  std::string item;               // empty for commit/abort
  std::optional<TxnId> version;   // reads only
  bool last_access = false;       // `!` hint: no further access to item by txn
  bool no_more_writes = false;    // `~` hint: no writes by txn after this one

  static Operation read(TxnId t, std::string item, std::optional<TxnId> version = std::nullopt);
  static Operation write(TxnId t, std::string item);
  static Operation commit(TxnId t);
  static Operation abort(TxnId t);
  static Operation step(Action a, TxnId t, std::string item);

  /// Same step ignoring hints and version tags.
  bool same_step(const Operation& other) const;
  friend bool operator==(const Operation&, const Operation&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, const std::string& what);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Ordered sequence of operations. Validates the per-transaction shape
/// (terminal step last and unique) on construction.
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(std::vector<Operation> ops);

  const std::vector<Operation>& ops() const { return ops_; }
  const std::set<TxnId>& txns() const { return txns_; }
  std::size_t size() const { return ops_.size(); }
  bool empty() const { return ops_.empty(); }
  const Operation& operator[](std::size_t i) const { return ops_[i]; }

  std::set<std::string> items() const;
  std::set<TxnId> committed() const;
  std::set<TxnId> aborted() const;
  /// Data steps of one transaction, in program order.
  std::vector<std::size_t> positions_of(TxnId t) const;
  bool has_lock_steps() const;

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  std::vector<Operation> ops_;
  std::set<TxnId> txns_;
};

Schedule parse_schedule(std::string_view text);
std::string format_operation(const Operation& op);
std::string format_schedule(const Schedule& s);

/// Drops lock, unlock, donate and certify steps.
Schedule data_projection(const Schedule& h);
/// Removes every operation of aborted transactions.
Schedule committed_projection(const Schedule& s);
/// Clears `!`/`~` hints and version tags.
Schedule strip_annotations(const Schedule& s);

/// Maps the position of each read in a schedule to the writer it observes.
class VersionFunction {
 public:
  VersionFunction() = default;
  explicit VersionFunction(std::map<std::size_t, TxnId> assignment)
      : assignment_(std::move(assignment)) {}

  const std::map<std::size_t, TxnId>& assignment() const { return assignment_; }
  std::optional<TxnId> writer_at(std::size_t pos) const;
  void assign(std::size_t pos, TxnId writer) { assignment_[pos] = writer; }
  void erase(std::size_t pos) { assignment_.erase(pos); }
  friend bool operator==(const VersionFunction&, const VersionFunction&) = default;

 private:
  std::map<std::size_t, TxnId> assignment_;
};

class InvalidVersionFunction : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Each read observes the last preceding write of its item.
VersionFunction last_writer_vf(const Schedule& s);
/// Each read observes its own prior write, else the committed version that is
/// latest in write order at the time of the read.
VersionFunction committed_read_vf(const Schedule& s);
/// Tagged reads use their tag; untagged reads fall back to `fallback`.
VersionFunction tagged_vf(const Schedule& s, const VersionFunction& fallback);
/// Throws InvalidVersionFunction when an assignment is missing or impossible.
void validate(const Schedule& s, const VersionFunction& vf);

struct ReadFrom {
  TxnId reader;
  std::string item;
  TxnId writer;
  auto operator<=>(const ReadFrom&) const = default;
};

/// Without a version function the schedule is read as monoversion.
std::set<ReadFrom> reads_from(const Schedule& s, const std::optional<VersionFunction>& vf = std::nullopt);

}  // namespace malkit
