#pragma once

// The acceptance suite: one runner per numbered criterion, each printing a
// single pass/fail line. Shared by the standalone test binary and the
// `suite` CLI subcommand. Every tolerance is pinned here, in code.

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace cprojlab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string details;
  double seconds = 0.0;
};

struct AcceptanceReport {
  std::vector<CriterionResult> results;
  bool all_pass = false;
  double total_seconds = 0.0;
  nlohmann::json to_json() const;
};

// progress != nullptr: prints "C01 PASS  name  (1.2s)  details" per criterion
AcceptanceReport run_acceptance(std::ostream* progress, uint64_t seed = 20240817);

}  // namespace cprojlab
