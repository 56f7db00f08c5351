#pragma once

#include <string>
#include <vector>

namespace malkit {

/// One recorded expectation. `kind` selects what is observed:
///   class     member / non-member under the committed-read version function
///   run       status of a run with final accesses marked, then the first
///             rejecting rule and any deadlock cycle
///   reads     executed reads with their versions
///   versions  version statistics after the run
///   commits   commit order and aborted transactions
///   audit     distinct rules violated, or clean
struct GoldenCase {
  std::string id;
  std::string kind;
  std::string subject;  // class, protocol or ruleset
  std::string schedule;
  std::string expected;
};

struct GoldenResult {
  GoldenCase golden;
  std::string observed;
  bool pass = false;
};

const std::vector<GoldenCase>& golden_cases();
std::string observe(const GoldenCase& g);
std::vector<GoldenResult> run_goldens();
/// One `PASS|FAIL id kind subject: observed` line per case, then a tally.
std::string format_goldens(const std::vector<GoldenResult>& results);

}  // namespace malkit
