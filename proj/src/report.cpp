#include "malkit/report.hpp"

namespace malkit {

using nlohmann::json;

namespace {

json txn_list(const std::vector<TxnId>& ts) {
  json a = json::array();
  for (TxnId t : ts) a.push_back("t" + std::to_string(t));
  return a;
}

std::string_view kind_name(Decision::Kind k) {
  switch (k) {
    case Decision::Kind::execute: return "execute";
    case Decision::Kind::block: return "block";
    case Decision::Kind::reject: return "reject";
    case Decision::Kind::abort: return "abort";
    case Decision::Kind::queued: return "queued";
    case Decision::Kind::skip: return "skip";
  }
  return "?";
}

}  // namespace

json to_json(const ClassVerdict& v) {
  json j{{"class", v.name}, {"member", v.member}};
  switch (v.witness_kind) {
    case ClassVerdict::Witness::none: break;
    case ClassVerdict::Witness::serial_order: j["serial_order"] = txn_list(v.witness); break;
    case ClassVerdict::Witness::cycle: j["cycle"] = txn_list(v.witness); break;
  }
  return j;
}

json to_json(const RunOutcome& o) {
  json trace = json::array();
  for (const auto& line : o.trace) {
    const Decision& d = line.decision;
    json e{{"step", line.step}, {"op", format_operation(line.op)}, {"decision", kind_name(d.kind)}};
    if (!d.rule.empty()) e["rule"] = d.rule;
    if (!d.reason.empty()) e["reason"] = d.reason;
    if (!d.on.empty()) e["on"] = txn_list({d.on.begin(), d.on.end()});
    if (d.version) e["version"] = *d.version;
    if (d.aborted) e["aborted"] = "t" + std::to_string(d.aborted);
    json emitted = json::array();
    for (const auto& op : d.emitted) emitted.push_back(format_operation(op));
    e["emitted"] = emitted;
    trace.push_back(e);
  }
  json live = json::object();
  for (const auto& [item, writers] : o.stats.live) {
    json a = json::array();
    for (TxnId w : writers) a.push_back(item + std::to_string(w));
    live[item] = a;
  }
  json j{{"status", status_name(o.status)},
         {"history", format_schedule(o.history)},
         {"aborted", txn_list({o.aborted.begin(), o.aborted.end()})},
         {"trace", trace},
         {"versions", {{"live", live}, {"peak", o.stats.peak}, {"uncommitted_reads", o.stats.uncommitted_reads}}}};
  if (o.deadlock_cycle) j["deadlock_cycle"] = txn_list(*o.deadlock_cycle);
  return j;
}

json to_json(const std::vector<Violation>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back({{"rule", v.rule}, {"positions", v.positions}, {"explanation", v.explanation}});
  return {{"clean", vs.empty()}, {"violations", a}};
}

json to_json(const ComparisonReport& r) {
  json regions = json::object();
  for (std::size_t i = 0; i < 4; ++i)
    regions[kRegionNames[i]] = {{"count", r.counts[i]}, {"witnesses", r.witnesses[i]}};
  return {{"a", r.a},
          {"b", r.b},
          {"space",
           {{"txns", r.space.txns}, {"ops", r.space.ops}, {"items", r.space.items}, {"hints", r.space.hints}}},
          {"total", r.total},
          {"regions", regions},
          {"inclusion", r.inclusion}};
}

json to_json(const std::vector<GoldenResult>& rs) {
  json a = json::array();
  std::size_t passed = 0;
  for (const auto& r : rs) {
    passed += r.pass;
    a.push_back({{"id", r.golden.id},
                 {"kind", r.golden.kind},
                 {"subject", r.golden.subject},
                 {"schedule", r.golden.schedule},
                 {"expected", r.golden.expected},
                 {"observed", r.observed},
                 {"pass", r.pass}});
  }
  return {{"cases", a}, {"passed", passed}, {"total", rs.size()}};
}

}  // namespace malkit
