#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mexlab/core/dataset.hpp"

namespace mexlab {

using Weights = std::vector<std::vector<double>>;  // row per class / unit

struct BinaryLR {
  std::vector<double> w;
  double beta = 0.0;
};

struct SoftmaxLR {
  Weights w;  // c rows of d
  std::vector<double> betas;
};

struct OvRLR {
  Weights w;  // c rows of d
  std::vector<double> betas;
};

inline constexpr int kDefaultHiddenUnits = 20;

/// One hidden tanh layer followed by a softmax layer.
struct MLP {
  Weights w1;  // h rows of d
  std::vector<double> b1;
  Weights w2;  // c rows of h
  std::vector<double> b2;

  std::size_t hidden() const { return b1.size(); }
};

/// Softmax over RBF kernel expansions around s representers.
struct KernelLR {
  Weights alphas;  // c rows of s
  std::vector<double> betas;
  std::vector<Point> representers;
  double gamma = 1.0;
};

struct LinearKernel {};
struct PolyKernel {
  int degree = 2;
};
struct RbfKernel {
  double gamma = 1.0;
};
using Kernel = std::variant<LinearKernel, PolyKernel, RbfKernel>;

double kernel_eval(const Kernel& k, const Point& a, const Point& b);
double rbf(const Point& a, const Point& b, double gamma);

/// Binary SVM. Linear models keep explicit (w, beta); kernel models keep the
/// dual expansion with signed coefficients (negative for class 0).
struct SVM {
  Kernel kernel = LinearKernel{};
  std::vector<double> w;
  std::vector<double> dual_alphas;
  std::vector<Point> support_vectors;
  double beta = 0.0;

  double decision_value(const Point& x) const;
};

enum class SplitKind {
  Leaf,
  CategoricalBinary,  // child 0 when the value is in left_set, else child 1
  CategoricalMulti,   // child index is the category value
  Threshold,          // child 0 when x <= threshold, else child 1
};

struct TreeNode {
  SplitKind kind = SplitKind::Leaf;
  int feature = -1;
  double threshold = 0.0;
  std::vector<int> left_set;
  std::vector<int> children;
  // Output used when computation halts here: a leaf, or an internal node
  // split on a MISSING feature.
  int label = 0;
  double confidence = 1.0;
  std::optional<double> value;  // regression output
  ProbVector distribution;      // optional; empty means degenerate from (label, confidence)
};

/// Arena-backed decision tree; node 0 is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;
  int classes = 2;
  bool regression = false;

  int child_for(int node, double value) const;
  int depth() const;
  int leaf_count() const;
  // Throws std::invalid_argument on dangling children, bad arities or
  // unreachable nodes.
  void validate(const FeatureSpace& space) const;
};

using ModelSpec = std::variant<BinaryLR, SoftmaxLR, OvRLR, MLP, KernelLR, SVM, DecisionTree>;

std::string kind_name(const ModelSpec& m);
int num_classes(const ModelSpec& m);
std::size_t input_dim(const ModelSpec& m);
// Count of real-valued unknowns an extraction has to recover.
std::size_t parameter_count(const ModelSpec& m);

}  // namespace mexlab
