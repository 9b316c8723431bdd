#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace qou {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  /// Measured numbers behind the verdict.
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  /// Multiplies every Monte Carlo sample size; 1 is the full suite.
  double scale = 1.0;
  std::uint64_t seed = 20261014;
  /// Criterion ids to run; empty runs 1 to 10.
  std::vector<int> only;
};

[[nodiscard]] std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& opt,
    const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace qou
