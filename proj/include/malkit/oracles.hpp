#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "malkit/schedule.hpp"

namespace malkit {

enum class ConflictKind : std::uint8_t { rw, wr, ww };
std::string_view kind_name(ConflictKind k);

struct ConflictPair {
  std::size_t first;
  std::size_t second;
  ConflictKind kind;
  friend bool operator==(const ConflictPair&, const ConflictPair&) = default;
};

class ConflictGraph {
 public:
  void add_node(TxnId t) { nodes_.insert(t); }
  void add_edge(TxnId from, TxnId to, ConflictKind kind);

  const std::set<TxnId>& nodes() const { return nodes_; }
  const std::map<std::pair<TxnId, TxnId>, std::set<ConflictKind>>& edges() const { return edges_; }
  bool has_edge(TxnId from, TxnId to) const { return edges_.count({from, to}) > 0; }

  /// A cycle rotated to start at its smallest member, if one exists.
  std::optional<std::vector<TxnId>> find_cycle() const;
  /// Kahn order, smallest id first among ready nodes. Empty if cyclic.
  std::optional<std::vector<TxnId>> topological_order() const;

 private:
  std::set<TxnId> nodes_;
  std::map<std::pair<TxnId, TxnId>, std::set<ConflictKind>> edges_;
};

struct ClassVerdict {
  std::string name;
  bool member = false;
  enum class Witness { none, serial_order, cycle } witness_kind = Witness::none;
  std::vector<TxnId> witness;
};

/// Line form: `<class> member|non-member <witness>`.
std::string format_verdict(const ClassVerdict& v);

struct OracleBounds {
  std::size_t max_txns = 6;
  std::size_t max_ops = 12;  // data operations
};

class BoundExceeded : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Monoversion conflicting pairs (same item, different txns, one a write).
std::vector<ConflictPair> conflict_pairs(const Schedule& s);
ConflictGraph conflict_graph(const Schedule& s);

ClassVerdict is_csr(const Schedule& s);
ClassVerdict is_vsr(const Schedule& s, const OracleBounds& bounds = {});

/// Multiversion conflict graph. Versions are ordered by write position. For a
/// read r_j(x_i): a later version of x by t_k gives j -> k (rw); the version
/// itself gives i -> j (wr); an earlier version by t_k gives k -> i (ww).
/// Throws InvalidVersionFunction for an incomplete or impossible `vf`, as do
/// the multiversion class tests.
ConflictGraph mv_conflict_graph(const Schedule& s, const VersionFunction& vf);
/// Same graph over a raw step sequence with no aborted transactions; the
/// version function is keyed by positions in `ops`.
ConflictGraph mv_conflict_graph(std::span<const Operation> ops, const VersionFunction& vf);
ClassVerdict is_mvcsr(const Schedule& s, const VersionFunction& vf);
/// Serial-order brute force: some serial monoversion schedule has the same
/// reads-from relation.
ClassVerdict is_mvsr(const Schedule& s, const VersionFunction& vf, const OracleBounds& bounds = {});
/// Independent route: some per-item version order makes the multiversion
/// serialization graph acyclic.
ClassVerdict is_mvsr_by_version_order(const Schedule& s, const VersionFunction& vf,
                                      const OracleBounds& bounds = {});

}  // namespace malkit
