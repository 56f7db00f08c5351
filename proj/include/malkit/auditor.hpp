#pragma once

#include <optional>
#include <string>
#include <vector>

#include "malkit/lock_engine.hpp"
#include "malkit/schedule.hpp"

namespace malkit {

enum class Ruleset : std::uint8_t { al, mal };
std::string_view ruleset_name(Ruleset r);

/// strict: unlock steps must be present. implied: locks still held at a
/// commit or abort are released there.
enum class UnlockMode : std::uint8_t { strict, implied };

struct Violation {
  std::string rule;                 // AL1..AL4, MAL1..MAL4 or WF
  std::vector<std::size_t> positions;
  std::string explanation;
};

/// `RULE <id> AT <pos,...>: <explanation>`
std::string format_violation(const Violation& v);

struct WellFormedness {
  bool ok = true;
  std::size_t position = 0;
  std::string defect;
};

WellFormedness well_formed(const Schedule& h, UnlockMode mode = UnlockMode::implied);

struct AuditOptions {
  UnlockMode unlocks = UnlockMode::implied;
  /// Indebtedness conflicts. Defaults: all for al, rw_only for mal.
  std::optional<ConflictMode> indebtedness;
};

/// Violations in ascending position order. A malformed history yields a
/// single WF violation.
std::vector<Violation> audit(const Schedule& h, Ruleset rules, const AuditOptions& opts = {});

}  // namespace malkit
