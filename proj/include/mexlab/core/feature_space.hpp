#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "mexlab/core/rng.hpp"

namespace mexlab {

struct Continuous {
  double lo = -1.0;
  double hi = 1.0;
};

struct Categorical {
  int arity = 2;
};

using FeatureKind = std::variant<Continuous, Categorical>;

/// A complete input vector. Categorical entries hold the category index as an
/// integral double.
using Point = std::vector<double>;

/// The input domain: one descriptor per dimension.
class FeatureSpace {
 public:
  FeatureSpace() = default;
  explicit FeatureSpace(std::vector<FeatureKind> dims);

  // d continuous dimensions, each over [lo, hi].
  static FeatureSpace box(std::size_t d, double lo = -1.0, double hi = 1.0);

  std::size_t size() const { return dims_.size(); }
  const std::vector<FeatureKind>& dims() const { return dims_; }
  const FeatureKind& operator[](std::size_t i) const { return dims_[i]; }

  bool is_continuous(std::size_t i) const;
  bool all_continuous() const;
  double lo(std::size_t i) const;
  double hi(std::size_t i) const;
  int arity(std::size_t i) const;

  // True when value is admissible for dimension i.
  bool admits(std::size_t i, double value) const;
  // Throws std::out_of_range naming the offending dimension.
  void check_point(std::span<const double> x) const;

  Point sample(Rng& rng) const;
  // Centre of every continuous range, category 0 for categorical dims.
  Point center() const;

  friend bool operator==(const FeatureSpace& a, const FeatureSpace& b);

 private:
  std::vector<FeatureKind> dims_;
};

/// An input over X_i ∪ {MISSING}.
class PartialQuery {
 public:
  PartialQuery() = default;
  explicit PartialQuery(std::size_t d) : values_(d) {}
  explicit PartialQuery(std::vector<std::optional<double>> values) : values_(std::move(values)) {}
  static PartialQuery complete(std::span<const double> x);
  static PartialQuery missing(std::size_t d) { return PartialQuery(d); }

  std::size_t size() const { return values_.size(); }
  bool is_missing(std::size_t i) const { return !values_[i].has_value(); }
  bool is_complete() const;
  const std::optional<double>& operator[](std::size_t i) const { return values_[i]; }
  void set(std::size_t i, double v) { values_[i] = v; }
  void clear(std::size_t i) { values_[i].reset(); }
  const std::vector<std::optional<double>>& values() const { return values_; }

  std::vector<std::size_t> specified() const;
  // Throws std::logic_error when any entry is MISSING.
  Point to_point() const;

  void check(const FeatureSpace& space) const;

  friend bool operator==(const PartialQuery&, const PartialQuery&) = default;

 private:
  std::vector<std::optional<double>> values_;
};

}  // namespace mexlab
