#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "malkit/schedule.hpp"

namespace malkit {

struct Version {
  TxnId writer = kInitialTxn;
  bool committed = true;
};

struct VersionStats {
  std::map<std::string, std::vector<TxnId>> live;  // per item, in version order
  std::size_t peak = 0;
  std::size_t uncommitted_reads = 0;
};

/// `x:{x0,x2} y:{y0} peak=3 uncommitted_reads=0`
std::string format_stats(const VersionStats& s);

/// Per-item version lists in write order. Version 0 appears on first
/// reference. A monoversion store keeps a single live version per item and
/// remembers the before-image so an abort can restore it.
class VersionStore {
 public:
  explicit VersionStore(bool multiversion = true, std::optional<std::size_t> max_versions = std::nullopt)
      : multiversion_(multiversion), max_versions_(max_versions) {}

  void touch(const std::string& item);
  /// A rewrite by the same writer moves its version to the end.
  void write(const std::string& item, TxnId txn);
  void commit(TxnId txn);
  void abort(TxnId txn);
  void note_uncommitted_read() { ++uncommitted_reads_; }

  const std::vector<Version>& versions(const std::string& item) const;
  bool has_version(const std::string& item, TxnId writer) const;
  bool is_committed(const std::string& item, TxnId writer) const;
  /// Newest committed version, in version order.
  TxnId latest_committed(const std::string& item) const;
  /// Newest version regardless of commit state.
  TxnId latest(const std::string& item) const;

  VersionStats stats() const;

 private:
  void update_peak();

  bool multiversion_;
  std::optional<std::size_t> max_versions_;
  std::map<std::string, std::vector<Version>> items_;
  std::map<std::string, std::vector<Version>> before_images_;  // monoversion only
  std::size_t peak_ = 0;
  std::size_t uncommitted_reads_ = 0;
};

}  // namespace malkit
