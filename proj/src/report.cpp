#include "dcx/report.hpp"

#include <algorithm>
#include <chrono>

namespace dcx {

std::string to_string(Status s) {
  switch (s) {
    case Status::Verified: return "verified";
    case Status::Refuted: return "refuted";
    case Status::SkippedSpecial: return "skipped-special";
    case Status::Inconclusive: return "inconclusive";
  }
  return "?";
}

bool status_matches(ExpectedStatus expected, Status actual) {
  switch (expected) {
    case ExpectedStatus::Verified:
      return actual == Status::Verified;
    case ExpectedStatus::SkippedSpecial:
      return actual == Status::SkippedSpecial;
    case ExpectedStatus::KnownDiscrepancy:
      return actual == Status::Refuted || actual == Status::Inconclusive;
  }
  return false;
}

json VerificationReport::to_json() const {
  json j;
  j["entry"] = entry;
  j["kind"] = kind;
  j["status"] = to_string(status);
  j["maxRelResidual"] = max_rel_residual;
  j["samples"] = samples;
  j["rejected"] = rejected;
  j["seed"] = seed;
  j["params"] = json::array();
  for (auto& draw : params) {
    json d = json::object();
    for (auto& [k, v] : draw) d[k] = v;
    j["params"].push_back(d);
  }
  j["notes"] = notes;
  return j;
}

json aggregate_reports(const std::vector<VerificationReport>& reports,
                       uint64_t seed, bool with_timestamp) {
  std::vector<const VerificationReport*> sorted;
  for (auto& r : reports) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const VerificationReport* a, const VerificationReport* b) {
                     return a->entry < b->entry;
                   });
  json out;
  out["seed"] = seed;
  std::map<std::string, int> counts;
  json arr = json::array();
  for (auto* r : sorted) {
    arr.push_back(r->to_json());
    counts[to_string(r->status)]++;
  }
  out["reports"] = arr;
  out["summary"] = counts;
  if (with_timestamp) {
    auto now = std::chrono::system_clock::now().time_since_epoch();
    out["generated_at_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  }
  return out;
}

}  // namespace dcx
