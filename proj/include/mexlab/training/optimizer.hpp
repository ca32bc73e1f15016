#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace mexlab {

enum class Solver {
  GradientDescent,  // full batch, momentum, backoff on loss increase
  Stochastic,       // minibatch SGD with momentum
  LBFGS,
};

struct OptimizerConfig {
  double learning_rate = 0.5;
  double momentum = 0.9;
  int max_epochs = 1000;
  std::size_t batch_size = 64;  // only used by Solver::Stochastic
  double tolerance = 1e-7;      // gradient infinity-norm
  double l2_lambda = 1e-4;
  std::uint64_t seed = 0;
  Solver solver = Solver::GradientDescent;

  void validate() const;
};

inline constexpr double kTargetLambda = 1e-4;
inline constexpr double kExtractionLambda = 1e-6;

struct LossReport {
  double final_loss = 0.0;
  int epochs_run = 0;
  bool converged = false;
};

/// Loss over an optional subset of samples. When batch is null the objective
/// covers every sample. grad, when non-null, receives the gradient.
using Objective = std::function<double(const std::vector<double>& x, std::vector<double>* grad,
                                       const std::vector<std::size_t>* batch)>;

// Minimises obj in place starting from x. n_samples is only needed for the
// stochastic solver.
LossReport minimize(const Objective& obj, std::vector<double>& x, const OptimizerConfig& cfg,
                    std::size_t n_samples = 0);

LossReport minimize_gd(const Objective& obj, std::vector<double>& x, const OptimizerConfig& cfg);
LossReport minimize_sgd(const Objective& obj, std::vector<double>& x, const OptimizerConfig& cfg,
                        std::size_t n_samples);
LossReport minimize_lbfgs(const Objective& obj, std::vector<double>& x,
                          const OptimizerConfig& cfg, int history = 10);

double inf_norm(const std::vector<double>& v);

}  // namespace mexlab
