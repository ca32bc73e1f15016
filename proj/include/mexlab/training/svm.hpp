#pragma once

#include "mexlab/core/dataset.hpp"
#include "mexlab/models/models.hpp"
#include "mexlab/training/optimizer.hpp"

namespace mexlab {

struct SvmFitInfo {
  double box_c = 0.0;               // C = 1 / (2 n lambda)
  std::vector<double> alphas;       // unsigned dual variables, one per training row
  std::vector<int> signs;           // +1 / -1 per training row
  int iterations = 0;
  bool converged = false;
};

// Linear kernel: L2-regularised hinge loss by subgradient descent, explicit
// (w, beta). Other kernels: SMO on the dual with box constraint C = 1/(2 n
// lambda). Needs binary labels.
SVM fit_svm(const Kernel& kernel, const Dataset& data, const OptimizerConfig& cfg,
            SvmFitInfo* info = nullptr);

// Same over explicit rows.
SVM fit_svm_rows(const Kernel& kernel, const std::vector<LabeledPoint>& rows,
                 const OptimizerConfig& cfg, SvmFitInfo* info = nullptr);

}  // namespace mexlab
