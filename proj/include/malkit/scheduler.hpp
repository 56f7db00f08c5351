#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "malkit/lock_engine.hpp"
#include "malkit/schedule.hpp"
#include "malkit/version_store.hpp"

namespace malkit {

enum class Protocol : std::uint8_t { two_pl, al, mal, mv2pl, two_v2pl, mvto, mal_mvto };
std::string_view protocol_name(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view name);
const std::vector<Protocol>& all_protocols();

enum class DonationPolicy : std::uint8_t { explicit_only, final_access };
enum class DeadlockAction : std::uint8_t { report, abort_youngest };

struct SchedulerConfig {
  Protocol protocol = Protocol::mal;
  bool read_donated = false;
  std::optional<std::size_t> max_versions;
  DonationPolicy donation_policy = DonationPolicy::final_access;
  DeadlockAction deadlock_action = DeadlockAction::report;
  /// Conflicts that make a transaction indebted. Defaults: all for al,
  /// rw_only for mal.
  std::optional<ConflictMode> indebtedness;
};

class ConfigError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Fills protocol defaults (2v2pl gets max_versions 2) and rejects
/// inconsistent combinations.
SchedulerConfig validated(SchedulerConfig cfg);

struct Decision {
  enum class Kind : std::uint8_t { execute, block, reject, abort, queued, skip };
  Kind kind = Kind::execute;
  std::optional<TxnId> version;   // reads
  std::set<TxnId> on;             // block / reject: transactions waited on
  std::string rule;               // reject / abort
  TxnId aborted = 0;              // abort
  std::string reason;
  std::vector<Operation> emitted;  // output steps, including the op itself

  bool executed() const { return kind == Kind::execute; }
};

std::string format_decision(const Decision& d);

enum class RunStatus : std::uint8_t { accepted, not_generated, deadlock };
std::string_view status_name(RunStatus s);

struct TraceLine {
  std::size_t step = 0;
  Operation op;
  Decision decision;
};

std::string format_trace_line(const TraceLine& t);

struct RunOutcome {
  RunStatus status = RunStatus::accepted;
  Schedule history;               // output steps, locks included
  VersionFunction vf;             // keyed by positions in data_projection(history)
  std::set<TxnId> aborted;
  std::vector<TraceLine> trace;
  VersionStats stats;
  std::optional<std::vector<TxnId>> deadlock_cycle;
};

/// Trace lines, then `STATUS ...` and `VERSIONS ...`.
std::string format_outcome(const RunOutcome& o);

enum class CommitGate : std::uint8_t { commit_now, wait };
struct GateResult {
  CommitGate gate = CommitGate::commit_now;
  std::set<TxnId> on;
};

/// Single-owner state machine for one protocol.
class Scheduler {
 public:
  explicit Scheduler(SchedulerConfig cfg);
  ~Scheduler();
  Scheduler(Scheduler&&) noexcept;
  Scheduler& operator=(Scheduler&&) noexcept;

  const SchedulerConfig& config() const;

  /// Decides one input step. Executed steps are appended to the history.
  /// Lock and unlock steps are not accepted as input.
  Decision submit(const Operation& op);
  /// Aborts txn: discards its versions and releases its locks.
  Decision abort_txn(TxnId txn, const std::string& rule, const std::string& reason);

  /// MVTO late-writer test for a write of item by txn. Returns the offending
  /// reader, if any.
  std::optional<TxnId> mvto_write_check(TxnId txn, const std::string& item) const;
  /// Hybrid commit test for a transaction that has executed all its ops.
  GateResult hybrid_commit_gate(TxnId txn) const;

  VersionStats version_stats() const;
  const std::vector<Operation>& history() const;
  const VersionFunction& version_function() const;
  const WaitsForGraph& waits_for() const;
  const LockTable& locks() const;
  bool terminated(TxnId txn) const;
  std::optional<std::uint64_t> timestamp(TxnId txn) const;

  struct State;

 private:
  SchedulerConfig cfg_;
  std::unique_ptr<State> state_;
};

/// Drives submit over the whole input. Blocked ops of a transaction queue and
/// are retried after each executed step; the run always consumes the whole
/// input. accepted iff every op executed on first submission.
struct RunOptions {
  /// Stop at the first op that does not execute on submission. The status is
  /// then not_generated and no deadlock analysis happens.
  bool stop_at_first_miss = false;
};

RunOutcome run(const SchedulerConfig& cfg, const Schedule& input, const RunOptions& opts = {});

}  // namespace malkit
