#pragma once

#include <vector>

#include "mexlab/core/dataset.hpp"
#include "mexlab/models/models.hpp"
#include "mexlab/training/optimizer.hpp"

namespace mexlab {

/// One training equation: an input and the probability vector to match.
/// Hard labels are stored as one-hot vectors.
struct Target {
  Point x;
  ProbVector t;
};

std::vector<Target> one_hot_targets(const std::vector<LabeledPoint>& rows, int classes);

enum class FamilyKind { BinaryLR, Softmax, OvR, MLP, KernelLR };

const char* family_name(FamilyKind k);
FamilyKind family_from_name(const std::string& name);

// Mean of -sum_j t_j log max(f_j(x), 1e-12) plus lambda times the squared
// norm of the weight parameters (biases and representers are not penalised).
double cross_entropy_loss(const ModelSpec& m, const std::vector<Target>& targets,
                          double l2_lambda);

// Gradient of cross_entropy_loss, shaped like the model's parameters.
ModelSpec loss_gradient(const ModelSpec& m, const std::vector<Target>& targets, double l2_lambda);

// Flat parameter layout used by the optimisers:
//   BinaryLR  w, beta
//   Softmax   W (row-major), betas       (OvR alike)
//   MLP       W1, b1, W2, b2
//   KernelLR  alphas, betas, representers
std::vector<double> flatten(const ModelSpec& m);
ModelSpec unflatten(const ModelSpec& shape, const std::vector<double>& flat);

// Loss and flat gradient over an optional subset of targets.
double loss_and_gradient(const ModelSpec& m, const std::vector<Target>& targets,
                         double l2_lambda, std::vector<double>* grad,
                         const std::vector<std::size_t>* batch = nullptr);

struct FamilyOptions {
  int hidden = kDefaultHiddenUnits;
  int representers = 8;
  double gamma = 1.0;
  bool train_representers = false;  // KernelLR: also move the representers
  double init_scale = 0.1;
};

struct FitResult {
  ModelSpec model;
  LossReport report;
};

// Small random weights; KernelLR representers are left empty.
ModelSpec initial_model(FamilyKind kind, std::size_t d, int classes, const FamilyOptions& opt,
                        std::uint64_t seed);

// Minimises the regularised loss from an explicit starting model.
FitResult fit_to_targets(const ModelSpec& init, const std::vector<Target>& targets,
                         const OptimizerConfig& cfg, bool train_representers = true);

// Trains a target model on the training partition.
FitResult fit_logistic_family(FamilyKind kind, const Dataset& data, const OptimizerConfig& cfg,
                              const FamilyOptions& opt = {});

}  // namespace mexlab
