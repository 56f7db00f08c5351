#include "malkit/version_store.hpp"

#include <algorithm>

namespace malkit {

std::string format_stats(const VersionStats& s) {
  std::string out;
  for (const auto& [item, writers] : s.live) {
    if (!out.empty()) out += ' ';
    out += item + ":{";
    for (std::size_t i = 0; i < writers.size(); ++i) {
      if (i) out += ',';
      out += item + std::to_string(writers[i]);
    }
    out += '}';
  }
  if (!out.empty()) out += ' ';
  out += "peak=" + std::to_string(s.peak) + " uncommitted_reads=" + std::to_string(s.uncommitted_reads);
  return out;
}

void VersionStore::touch(const std::string& item) {
  if (items_.try_emplace(item, std::vector<Version>{Version{}}).second) update_peak();
}

void VersionStore::write(const std::string& item, TxnId txn) {
  touch(item);
  auto& vs = items_[item];
  if (!multiversion_) {
    if (vs.back().writer != txn) before_images_[item].push_back(vs.back());
    vs.back() = {txn, false};
    return;
  }
  std::erase_if(vs, [&](const Version& v) { return v.writer == txn; });
  vs.push_back({txn, false});
  update_peak();
}

void VersionStore::commit(TxnId txn) {
  for (auto& [item, vs] : items_) {
    bool wrote = false;
    for (auto& v : vs)
      if (v.writer == txn) v.committed = wrote = true;
    if (!multiversion_) {
      if (wrote) before_images_.erase(item);
      continue;
    }
    if (!wrote || !max_versions_) continue;
    // Drop the oldest committed versions beyond the bound.
    std::size_t live = vs.size();
    for (auto it = vs.begin(); it != vs.end() && live > *max_versions_;) {
      if (it->committed && it->writer != txn) {
        it = vs.erase(it);
        --live;
      } else {
        ++it;
      }
    }
  }
}

void VersionStore::abort(TxnId txn) {
  for (auto& [item, vs] : items_) {
    if (!multiversion_) {
      if (vs.back().writer != txn) continue;
      auto& stack = before_images_[item];
      vs.back() = stack.empty() ? Version{} : stack.back();
      if (!stack.empty()) stack.pop_back();
      continue;
    }
    std::erase_if(vs, [&](const Version& v) { return v.writer == txn; });
  }
}

const std::vector<Version>& VersionStore::versions(const std::string& item) const {
  static const std::vector<Version> initial{Version{}};
  auto it = items_.find(item);
  return it == items_.end() ? initial : it->second;
}

bool VersionStore::has_version(const std::string& item, TxnId writer) const {
  const auto& vs = versions(item);
  return std::any_of(vs.begin(), vs.end(), [&](const Version& v) { return v.writer == writer; });
}

bool VersionStore::is_committed(const std::string& item, TxnId writer) const {
  for (const auto& v : versions(item))
    if (v.writer == writer) return v.committed;
  return false;
}

TxnId VersionStore::latest_committed(const std::string& item) const {
  const auto& vs = versions(item);
  for (auto it = vs.rbegin(); it != vs.rend(); ++it)
    if (it->committed) return it->writer;
  return kInitialTxn;
}

TxnId VersionStore::latest(const std::string& item) const { return versions(item).back().writer; }

void VersionStore::update_peak() {
  std::size_t total = 0;
  for (const auto& [item, vs] : items_) total += vs.size();
  peak_ = std::max(peak_, total);
}

VersionStats VersionStore::stats() const {
  VersionStats s;
  for (const auto& [item, vs] : items_)
    for (const auto& v : vs) s.live[item].push_back(v.writer);
  s.peak = peak_;
  s.uncommitted_reads = uncommitted_reads_;
  return s;
}

}  // namespace malkit
