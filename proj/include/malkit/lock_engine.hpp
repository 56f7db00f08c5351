#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "malkit/schedule.hpp"

namespace malkit {

enum class LockMode : std::uint8_t { read, write, certify };
std::string_view mode_name(LockMode m);
LockMode lock_mode_for(Action a);  // access, lock, unlock or data step

/// Which compatibility table applies.
///  - monoversion: only read/read is compatible (2PL, AL).
///  - mv2pl: write is compatible with read in both directions; certify is
///    compatible with nothing.
///  - mal: like mv2pl, except that a requested write conflicts with a held
///    read and a held write does not block a certify.
enum class LockSemantics : std::uint8_t { monoversion, mv2pl, mal };

enum class ConflictMode : std::uint8_t { all, rw_only, rw_ww };
std::string_view conflict_mode_name(ConflictMode m);

bool compatible(LockSemantics sem, LockMode held, bool held_donated, LockMode requested);

/// Whether data step `earlier` followed by `later` (same item, different
/// transactions) conflicts under `mode`.
bool conflicts(const Operation& earlier, const Operation& later, ConflictMode mode);

struct LockEntry {
  std::string item;
  TxnId holder = 0;
  LockMode mode = LockMode::read;
  bool donated = false;
  bool accessed = false;  // holder performed a data op on item under this lock
};

class LockError : public std::runtime_error {
 public:
  LockError(std::string rule, const std::string& what) : std::runtime_error(what), rule_(std::move(rule)) {}
  const std::string& rule() const { return rule_; }

 private:
  std::string rule_;
};

struct AcquireResult {
  bool granted = false;
  std::set<TxnId> blockers;  // non-donated incompatible holders
  std::set<TxnId> waived;    // donated incompatible holders
};

struct WakeRecord {
  TxnId donor = 0;
  TxnId beneficiary = 0;
  std::set<std::string> items;
  bool complete = false;
};

class LockTable {
 public:
  explicit LockTable(LockSemantics sem = LockSemantics::monoversion) : sem_(sem) {}

  LockSemantics semantics() const { return sem_; }

  /// Evaluates a request without changing the table. Holders in `ignore` are
  /// skipped. Throws LockError("MAL1") if txn has donated the item, except for a
  /// certify upgrade.
  AcquireResult probe(TxnId txn, const std::string& item, LockMode mode,
                      const std::set<TxnId>& ignore = {}) const;
  /// Grants when compatible; an existing entry of txn is upgraded in place.
  AcquireResult acquire(TxnId txn, const std::string& item, LockMode mode,
                        const std::set<TxnId>& ignore = {});
  void mark_accessed(TxnId txn, const std::string& item);
  void donate(TxnId txn, const std::string& item);
  void release(TxnId txn, const std::string& item);
  /// Releases every entry of txn; returns the items in acquisition order.
  std::vector<std::string> release_all(TxnId txn);

  const LockEntry* find(const std::string& item, TxnId holder) const;
  std::vector<LockEntry> entries_of(TxnId holder) const;  // acquisition order
  bool has_donated(TxnId holder, const std::string& item) const;
  bool any_donated() const;

  const std::vector<WakeRecord>& wakes() const { return wakes_; }

  /// Sorted `item holder mode [donated]` lines.
  std::vector<std::string> dump() const;

 private:
  LockSemantics sem_;
  std::vector<LockEntry> entries_;  // acquisition order
  std::set<std::pair<TxnId, std::string>> donated_ever_;
  std::vector<WakeRecord> wakes_;
};

// History predicates. Positions index into `h`. A donor's wake on x closes at
// its unlock of x or at its commit/abort.

bool in_wake(std::span<const Operation> h, std::size_t pos, TxnId donor);
/// tj is indebted to ti when some op of tj in ti's wake conflicts with an
/// earlier op of ti, directly or through a third transaction's op on the
/// same item.
bool is_indebted(std::span<const Operation> h, TxnId tj, TxnId ti, ConflictMode mode);
/// Position where ti begins to unlock: its first unlock step, else its
/// commit/abort. nullopt if neither occurs in h.
std::optional<std::size_t> begins_to_unlock(std::span<const Operation> h, TxnId ti);

struct WaitEdge {
  TxnId waiter;
  TxnId holder;
  std::string item;
  LockMode mode;
  auto operator<=>(const WaitEdge&) const = default;
};

class WaitsForGraph {
 public:
  void add(TxnId waiter, TxnId holder, const std::string& item, LockMode mode);
  void clear_waiter(TxnId waiter);
  void remove_txn(TxnId t);
  const std::set<WaitEdge>& edges() const { return edges_; }
  bool empty() const { return edges_.empty(); }

 private:
  std::set<WaitEdge> edges_;
};

/// A cycle rotated to begin at its smallest member, or nullopt.
std::optional<std::vector<TxnId>> detect_deadlock(const WaitsForGraph& g);

}  // namespace malkit
