#pragma once

#include <cstdint>

#include "mexlab/models/models.hpp"

namespace mexlab {

/// The two-feature example tree: Size in [0, 100] and Color in
/// {R=0, B=1, G=2, Y=3, O=4}. Leaves id1..id6 carry distinct ids.
struct ExampleTree {
  FeatureSpace space;
  DecisionTree tree;
  // Node index of each leaf id1..id6 (index 0 unused).
  int leaf[7] = {};
};
ExampleTree size_color_tree();

enum Color { kRed = 0, kBlue = 1, kGreen = 2, kYellow = 3, kOrange = 4 };

struct TreeGenOptions {
  int leaves = 16;
  int depth = -1;           // exact maximum depth when >= 0
  int classes = 2;
  double eps = 1e-3;        // thresholds are multiples of eps, pieces >= 2 eps wide
  int duplicate_leaf_ids = 0;  // leaves sharing an id with another leaf
};

// Random tree over space whose every node (internal or leaf) has a distinct
// (label, confidence) id unless duplicates are requested.
DecisionTree random_tree(const FeatureSpace& space, const TreeGenOptions& opt, std::uint64_t seed);

// A 4-feature mixed space used by the tree corpus: two continuous
// features on [-1, 1] and two categorical ones of arity 3 and 4.
FeatureSpace corpus_space();

struct CorpusTree {
  FeatureSpace space;
  DecisionTree tree;
};
// count trees with 2..max_leaves leaves and unique ids.
std::vector<CorpusTree> tree_corpus(int count, int max_leaves, std::uint64_t seed, double eps = 1e-3);

// A credit-scoring-shaped target: 11 mixed features on raw ranges, 26
// leaves, depth 11, one pair of leaves sharing an id.
CorpusTree credit_shaped_tree(std::uint64_t seed = 7);

// O(m (d_cat k + d_cont m log2(b / eps))) without the constant, with k the
// largest arity and b the widest continuous range.
double path_find_bound(const FeatureSpace& space, int leaves, double eps);

}  // namespace mexlab
