#pragma once

#include <cstdint>
#include <vector>

#include "mexlab/oracle/oracle.hpp"
#include "mexlab/training/logistic.hpp"

namespace mexlab {

/// Oracle samples read as equations in the target's parameters.
struct EquationSet {
  std::vector<Point> xs;
  std::vector<ProbVector> ps;

  std::size_t size() const { return xs.size(); }
  std::vector<Target> targets() const;
};

/// Query budget alpha * k for k unknown parameters.
struct BudgetSpec {
  double alpha = 1.0;
  std::size_t k_unknowns = 0;

  // ceil(alpha * k); throws when alpha <= 0 or the budget is below one query.
  std::size_t budget() const;
};

// Number of parameters a surrogate of this family has over d inputs.
std::size_t family_unknowns(FamilyKind kind, std::size_t d, int classes,
                            const FamilyOptions& opt = {});

// Queries m uniform points of the oracle's space in one batch.
EquationSet collect_uniform(QueryOracle& oracle, std::size_t m, std::uint64_t seed);

struct BinaryLrInfo {
  int retries = 0;
  bool approximate = false;  // probabilities were rounded to fewer than 6 decimals
};

// Solves w.x + beta = logit(f_1(x)) from d + 1 fixed queries: the origin and
// the unit basis points when the box admits them, else the box centre and
// centre + quarter-width steps. A singular system is retried with fresh
// uniform points, at most 3 times.
BinaryLR extract_binary_lr(QueryOracle& oracle, std::uint64_t seed = 0,
                           BinaryLrInfo* info = nullptr);

// L-BFGS settings for loss-minimisation extraction. Identifiable linear
// families (binary, softmax, OvR) are fitted without a ridge so the minimiser
// is the target itself; MLP and KernelLR surrogates keep lambda = 1e-6.
OptimizerConfig extraction_config(FamilyKind kind, std::uint64_t seed = 0);

// Fits a surrogate of the given family to collected equations.
FitResult fit_equations(FamilyKind kind, const EquationSet& eq, std::size_t d, int classes,
                        const OptimizerConfig& cfg, const FamilyOptions& fam = {});

// Spends the whole budget on uniform queries, then minimises the soft-target
// cross-entropy. KernelLR surrogates start from uniform random representers.
FitResult extract_by_loss_min(FamilyKind kind, QueryOracle& oracle, const BudgetSpec& budget,
                              const OptimizerConfig& cfg, const FamilyOptions& fam = {});

struct KlrExtraction {
  KernelLR model;
  LossReport report;
  std::vector<Point> initial_representers;  // the random starting points
};

// Joint fit of weights, biases and representer coordinates. The objective is
// not convex; restarts > 1 refits the same equations from fresh random
// representers and keeps the lowest loss.
KlrExtraction extract_klr_representers(QueryOracle& oracle, std::size_t s_assumed, double gamma,
                                       const BudgetSpec& budget, const OptimizerConfig& cfg,
                                       int restarts = 1);

/// How close the extracted representers came to the target's.
struct LeakageReport {
  std::vector<double> nearest_l1;          // per true representer
  std::vector<std::size_t> nearest_index;  // into the extracted representers
  double mean_l1 = 0.0;
  double baseline_l1 = 0.0;  // same measure for the random initial representers
  std::vector<double> weight_norms;  // l2 norm of each extracted alpha column
  bool underestimated = false;       // fewer extracted than true representers
};

LeakageReport leakage_report(const std::vector<Point>& truth, const KlrExtraction& ex);

}  // namespace mexlab
