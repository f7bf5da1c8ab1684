#pragma once

#include <string>
#include <vector>

namespace lvr {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  std::vector<std::string> details;  // one line per measured quantity
};

struct AcceptanceOptions {
  int workers = 1;
};

inline constexpr int kCriterionCount = 12;

/// Runs criterion id (1..12). A criterion passes only when every check
/// holds and the runtime stays inside its budget.
CriterionResult run_criterion(int id, const AcceptanceOptions& opt = {});

}  // namespace lvr
