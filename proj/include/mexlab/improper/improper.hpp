#pragma once

#include "mexlab/attacks/eqsolve.hpp"
#include "mexlab/attacks/report.hpp"

namespace mexlab {

struct ImproperExtraction {
  MLP model;
  LossReport loss;
  // kind, alpha and queries_used are filled; the error fields are left for
  // the caller, who holds the target.
  ExtractionReport report;
  std::size_t surrogate_params = 0;
  std::size_t target_params = 0;  // a softmax over the oracle's space
  double param_ratio = 0.0;       // surrogate / target
};

// Equation solving with an MLP surrogate of the given width against a
// probability oracle. Throws for hidden < 1 and for label-only oracles.
ImproperExtraction improper_extract(QueryOracle& oracle, int hidden, const BudgetSpec& budget,
                                    const OptimizerConfig& cfg);

}  // namespace mexlab
