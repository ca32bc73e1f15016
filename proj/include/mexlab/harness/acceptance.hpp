#pragma once

#include <functional>
#include <string>
#include <vector>

namespace mexlab {

/// Outcome of one acceptance criterion.
struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;  // the measured numbers behind the verdict
  std::string csv;     // per-run rows in the report CSV layout
};

struct AcceptanceOptions {
  int threads = 1;
  std::string out_dir;  // when set, each criterion's CSV is written there
};

inline constexpr int kCriteria = 12;

// Criteria 1..11 measure one claim each. Criterion 12 reruns 1..11 and
// compares their CSV output byte for byte.
CriterionResult run_criterion(int id, const AcceptanceOptions& opt);

// All criteria in order; on_result fires as each one finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

std::string format_result(const CriterionResult& r);

}  // namespace mexlab
