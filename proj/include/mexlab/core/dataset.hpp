#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mexlab/core/feature_space.hpp"

namespace mexlab {

/// Class probabilities, one entry per class.
using ProbVector = std::vector<double>;

// Entries in [0,1] summing to 1 within tol.
bool is_prob_vector(const ProbVector& p, double tol = 1e-9);

// Lowest index wins ties.
int argmax(const ProbVector& p);

struct LabeledPoint {
  Point x;
  int y = 0;
};

struct Dataset {
  FeatureSpace space;
  int classes = 2;
  std::vector<LabeledPoint> rows;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  // Shuffles row indices and assigns the first train_fraction to train.
  void split(double train_fraction, std::uint64_t seed);
  void validate() const;

  std::vector<LabeledPoint> train_rows() const;
  std::vector<LabeledPoint> test_rows() const;
  std::vector<int> class_counts() const;
};

}  // namespace mexlab
