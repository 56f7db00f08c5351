#pragma once

#include <json.hpp>
#include <vector>

#include "malkit/auditor.hpp"
#include "malkit/goldens.hpp"
#include "malkit/harness.hpp"
#include "malkit/oracles.hpp"
#include "malkit/scheduler.hpp"

namespace malkit {

// JSON forms of the CLI results. Keys are stable; objects serialize with
// sorted keys so output is byte-for-byte reproducible.
nlohmann::json to_json(const ClassVerdict& v);
nlohmann::json to_json(const RunOutcome& o);
nlohmann::json to_json(const std::vector<Violation>& vs);
nlohmann::json to_json(const ComparisonReport& r);
nlohmann::json to_json(const std::vector<GoldenResult>& rs);

}  // namespace malkit
