#pragma once

#include "mexlab/core/dataset.hpp"
#include "mexlab/models/models.hpp"

namespace mexlab {

inline constexpr double kWilsonZ = 1.96;

// Lower end of the Wilson score interval for `successes` out of n.
double wilson_lower_bound(double successes, double n, double z = kWilsonZ);

struct TreeConfig {
  int max_depth = 8;
  int min_leaf = 1;
};

// Greedy Gini induction over the training partition. Continuous features get
// threshold splits; categorical features get either a k-ary split or a
// binary partition, whichever lowers impurity more. Every node stores its
// majority label with a Wilson-bound confidence.
DecisionTree fit_tree(const Dataset& data, const TreeConfig& cfg);
DecisionTree fit_tree_rows(const FeatureSpace& space, int classes,
                           const std::vector<LabeledPoint>& rows, const TreeConfig& cfg);

}  // namespace mexlab
