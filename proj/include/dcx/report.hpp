#pragma once

#include <nlohmann/json.hpp>
#include <map>
#include <string>
#include <vector>

#include "dcx/model.hpp"

namespace dcx {

using json = nlohmann::json;

enum class Status { Verified, Refuted, SkippedSpecial, Inconclusive };

std::string to_string(Status s);

// An expected status "matches": verified -> verified,
// skipped-special -> skipped-special, known-discrepancy -> refuted or
// inconclusive.
bool status_matches(ExpectedStatus expected, Status actual);

struct VerificationReport {
  std::string entry;
  std::string kind = "residual";  // residual | symmetry | reduction | transform
  Status status = Status::Inconclusive;
  double max_rel_residual = 0.0;
  int samples = 0;
  int rejected = 0;
  std::vector<std::map<std::string, double>> params;
  uint64_t seed = 0;
  std::string notes;

  json to_json() const;
};

// Aggregates reports sorted by entry id; adds a summary header.
json aggregate_reports(const std::vector<VerificationReport>& reports,
                       uint64_t seed, bool with_timestamp);

}  // namespace dcx
