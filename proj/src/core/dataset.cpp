#include "mexlab/core/dataset.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mexlab {

bool is_prob_vector(const ProbVector& p, double tol) {
  if (p.empty()) return false;
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol;
}

int argmax(const ProbVector& p) {
  if (p.empty()) throw std::invalid_argument("argmax of empty vector");
  int best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[best]) best = static_cast<int>(i);
  }
  return best;
}

void Dataset::split(double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie in (0,1)");
  }
  std::vector<std::size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(idx, rng);
  const auto n_train = static_cast<std::size_t>(std::round(train_fraction * rows.size()));
  train.assign(idx.begin(), idx.begin() + n_train);
  test.assign(idx.begin() + n_train, idx.end());
}

void Dataset::validate() const {
  if (classes < 1) throw std::invalid_argument("dataset needs at least one class");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    space.check_point(rows[r].x);
    if (rows[r].y < 0 || rows[r].y >= classes) {
      throw std::out_of_range("row " + std::to_string(r) + " has label outside Z_c");
    }
  }
  std::vector<char> seen(rows.size(), 0);
  for (auto part : {&train, &test}) {
    for (std::size_t i : *part) {
      if (i >= rows.size()) throw std::out_of_range("split index past the last row");
      if (seen[i]) throw std::invalid_argument("train/test partitions overlap");
      seen[i] = 1;
    }
  }
  if (!train.empty() || !test.empty()) {
    for (char s : seen) {
      if (!s) throw std::invalid_argument("train/test partitions do not cover all rows");
    }
  }
}

std::vector<LabeledPoint> Dataset::train_rows() const {
  std::vector<LabeledPoint> out;
  out.reserve(train.size());
  for (std::size_t i : train) out.push_back(rows[i]);
  return out;
}

std::vector<LabeledPoint> Dataset::test_rows() const {
  std::vector<LabeledPoint> out;
  out.reserve(test.size());
  for (std::size_t i : test) out.push_back(rows[i]);
  return out;
}

std::vector<int> Dataset::class_counts() const {
  std::vector<int> counts(classes, 0);
  for (const auto& r : rows) ++counts[r.y];
  return counts;
}

}  // namespace mexlab
