#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "malkit/oracles.hpp"
#include "malkit/schedule.hpp"
#include "malkit/scheduler.hpp"

namespace malkit {

struct SpaceSpec {
  std::size_t txns = 2;
  std::size_t ops = 1;    // data ops per transaction, at most
  std::size_t items = 1;
  bool reads = true;
  bool writes = true;
  bool hints = false;     // search donation hint placements
  std::size_t cap = 1'000'000;
};

class CapExceeded : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// `3x2x2 rw hints` style label.
std::string describe(const SpaceSpec& space);

/// Schedules in the space up to renaming: transactions and items are numbered
/// by first appearance, each transaction issues 1..ops distinct data steps
/// and then commits, and commits interleave freely after the last step.
/// Stops counting once the cap is passed.
std::size_t count_space(const SpaceSpec& space);
/// Deterministic, duplicate-free. Throws CapExceeded before producing
/// anything if the space is larger than the cap.
void enumerate(const SpaceSpec& space, const std::function<void(const Schedule&)>& visit);

/// Marks every transaction's final access of each item with `!`.
Schedule annotate_last_access(const Schedule& s);
/// Inserts d_i(x) right after t_i's final access of x for each listed pair.
Schedule with_eager_donations(const Schedule& s, const std::vector<std::pair<TxnId, std::string>>& pairs);

/// A protocol or a class.
struct Subject {
  enum class Kind : std::uint8_t { protocol, klass } kind = Kind::protocol;
  Protocol protocol = Protocol::mal;
  std::string klass;  // csr, vsr, mvcsr, mvsr
  std::string name() const;
};
std::optional<Subject> parse_subject(std::string_view name);

struct GenResult {
  bool member = false;
  std::optional<RunOutcome> run;   // the accepting run, if any
  Schedule input;                  // the annotated input that was accepted
};

/// Gen(p) membership. Without hint search the schedule runs as given. With
/// it, last accesses are marked `!` and eager donation placements are
/// tried; mal additionally retries with read_donated.
GenResult generated_by(Protocol p, const Schedule& s, bool hint_search);

/// Class membership of a raw schedule, using the committed-read version
/// function for multiversion classes unless `vf` is given.
bool class_member(const std::string& klass, const Schedule& s, const std::optional<VersionFunction>& vf = std::nullopt);

struct ComparisonReport {
  SpaceSpec space;
  std::string a, b;
  std::size_t total = 0;
  // both, a_only, b_only, neither
  std::array<std::size_t, 4> counts{};
  std::array<std::vector<std::string>, 4> witnesses;
  bool inclusion = false;  // a \ b empty
};

inline constexpr std::size_t kWitnessCap = 5;
inline constexpr std::array<const char*, 4> kRegionNames{"both", "a_only", "b_only", "neither"};

ComparisonReport compare(const Subject& a, const Subject& b, const SpaceSpec& space);
std::string format_report(const ComparisonReport& r);

/// Every membership needed for the inclusion suite, decided once per schedule.
struct Census {
  bool csr = false, vsr = false, mvcsr = false, mvsr = false, mvsr_by_order = false;
  bool g2pl = false, gal = false, gmal = false, gmv2pl = false, g2v2pl = false;
  bool mal_output_mvcsr = true;  // MVCSR under the accepting run's version function
};

Census census(const Schedule& s, bool hint_search);

}  // namespace malkit
