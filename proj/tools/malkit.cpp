// malkit command line: check, run, audit, compare, goldens.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "malkit/auditor.hpp"
#include "malkit/goldens.hpp"
#include "malkit/harness.hpp"
#include "malkit/oracles.hpp"
#include "malkit/report.hpp"
#include "malkit/scheduler.hpp"

using namespace malkit;

namespace {

// A schedule file holds one schedule, possibly split over several lines.
// Text after `#` is a comment.
Schedule read_schedule_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line, text;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    if (!text.empty()) text += ' ';
    text += line.substr(b, e - b + 1);
  }
  return parse_schedule(text);
}

void emit(bool json, const nlohmann::json& doc, const std::string& text) {
  if (json) std::cout << doc.dump(2) << "\n";
  else std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiversion altruistic locking toolkit"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "Print one JSON document instead of lines");

  std::string file;

  auto* check = app.add_subcommand("check", "Classify a schedule");
  std::string klass, vf_name = "default";
  check->add_option("--class", klass, "csr|vsr|mvcsr|mvsr")
      ->required()
      ->check(CLI::IsMember({"csr", "vsr", "mvcsr", "mvsr"}));
  check->add_option("--vf", vf_name, "Version function for multiversion classes")
      ->check(CLI::IsMember({"default", "lastwriter"}));
  check->add_option("file", file)->required();

  auto* runc = app.add_subcommand("run", "Run a schedule through a scheduler");
  std::string proto, deadlock = "report";
  bool read_donated = false;
  runc->add_option("--protocol", proto, "2pl|al|mal|mv2pl|2v2pl|mvto|mal-mvto")
      ->required()
      ->check(CLI::IsMember({"2pl", "al", "mal", "mv2pl", "2v2pl", "mvto", "mal-mvto"}));
  runc->add_flag("--read-donated", read_donated, "mal: reads may take donated uncommitted versions");
  runc->add_option("--deadlock", deadlock, "report|abort-youngest")
      ->check(CLI::IsMember({"report", "abort-youngest"}));
  runc->add_option("file", file)->required();

  auto* auditc = app.add_subcommand("audit", "Check a locked history against a ruleset");
  std::string rules;
  bool strict = false;
  auditc->add_option("--rules", rules, "al|mal")->required()->check(CLI::IsMember({"al", "mal"}));
  auditc->add_flag("--strict-unlocks", strict, "Require explicit unlock steps");
  auditc->add_option("file", file)->required();

  auto* comparec = app.add_subcommand("compare", "Compare two protocols or classes over a schedule space");
  std::string a, b;
  SpaceSpec space;
  comparec->add_option("--a", a)->required();
  comparec->add_option("--b", b)->required();
  comparec->add_option("--txns", space.txns)->required()->check(CLI::PositiveNumber);
  comparec->add_option("--ops", space.ops)->required()->check(CLI::PositiveNumber);
  comparec->add_option("--items", space.items)->required()->check(CLI::PositiveNumber);
  comparec->add_flag("--hints", space.hints, "Search donation hint placements");

  auto* goldensc = app.add_subcommand("goldens", "Replay the recorded expectations");

  for (auto* sub : {check, runc, auditc, comparec, goldensc})
    sub->add_flag("--json", json, "Print one JSON document instead of lines");

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) {
      Schedule s = data_projection(read_schedule_file(file));
      VersionFunction vf = vf_name == "lastwriter" ? last_writer_vf(s) : tagged_vf(s, committed_read_vf(s));
      ClassVerdict v = klass == "csr"     ? is_csr(s)
                       : klass == "vsr"   ? is_vsr(s)
                       : klass == "mvcsr" ? is_mvcsr(s, vf)
                                          : is_mvsr(s, vf);
      emit(json, to_json(v), format_verdict(v) + "\n");
    } else if (runc->parsed()) {
      SchedulerConfig cfg;
      cfg.protocol = *parse_protocol(proto == "mal-mvto" ? "mal_mvto" : proto);
      cfg.read_donated = read_donated;
      cfg.deadlock_action = deadlock == "report" ? DeadlockAction::report : DeadlockAction::abort_youngest;
      RunOutcome o = run(validated(cfg), read_schedule_file(file));
      emit(json, to_json(o), format_outcome(o));
    } else if (auditc->parsed()) {
      AuditOptions opts;
      opts.unlocks = strict ? UnlockMode::strict : UnlockMode::implied;
      auto vs = audit(read_schedule_file(file), rules == "al" ? Ruleset::al : Ruleset::mal, opts);
      std::string text;
      for (const auto& v : vs) text += format_violation(v) + "\n";
      if (vs.empty()) text = "CLEAN\n";
      emit(json, to_json(vs), text);
    } else if (comparec->parsed()) {
      auto sa = parse_subject(a), sb = parse_subject(b);
      if (!sa || !sb) throw std::invalid_argument("unknown protocol or class " + (sa ? b : a));
      ComparisonReport r = compare(*sa, *sb, space);
      emit(json, to_json(r), format_report(r));
    } else if (goldensc->parsed()) {
      auto rs = run_goldens();
      emit(json, to_json(rs), format_goldens(rs));
      for (const auto& r : rs)
        if (!r.pass) return 1;
    }
  } catch (const ParseError& e) {
    std::cerr << "malkit: parse error at " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "malkit: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
