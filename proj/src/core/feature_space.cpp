#include "mexlab/core/feature_space.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mexlab {

FeatureSpace::FeatureSpace(std::vector<FeatureKind> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("FeatureSpace: need at least one dimension");
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (const auto* c = std::get_if<Continuous>(&dims_[i])) {
      if (!(c->lo < c->hi)) {
        throw std::invalid_argument("FeatureSpace: dimension " + std::to_string(i) +
                                    " has lo >= hi");
      }
    } else if (std::get<Categorical>(dims_[i]).arity < 2) {
      throw std::invalid_argument("FeatureSpace: dimension " + std::to_string(i) +
                                  " has arity < 2");
    }
  }
}

FeatureSpace FeatureSpace::box(std::size_t d, double lo, double hi) {
  return FeatureSpace(std::vector<FeatureKind>(d, Continuous{lo, hi}));
}

bool FeatureSpace::is_continuous(std::size_t i) const {
  return std::holds_alternative<Continuous>(dims_.at(i));
}

bool FeatureSpace::all_continuous() const {
  for (const auto& k : dims_) {
    if (!std::holds_alternative<Continuous>(k)) return false;
  }
  return true;
}

double FeatureSpace::lo(std::size_t i) const { return std::get<Continuous>(dims_.at(i)).lo; }
double FeatureSpace::hi(std::size_t i) const { return std::get<Continuous>(dims_.at(i)).hi; }
int FeatureSpace::arity(std::size_t i) const { return std::get<Categorical>(dims_.at(i)).arity; }

bool FeatureSpace::admits(std::size_t i, double value) const {
  if (std::isnan(value)) return false;
  if (const auto* c = std::get_if<Continuous>(&dims_[i])) {
    return value >= c->lo && value <= c->hi;
  }
  const int k = std::get<Categorical>(dims_[i]).arity;
  return value == std::floor(value) && value >= 0 && value < k;
}

void FeatureSpace::check_point(std::span<const double> x) const {
  if (x.size() != dims_.size()) {
    throw std::out_of_range("point has " + std::to_string(x.size()) + " entries, space has " +
                            std::to_string(dims_.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!admits(i, x[i])) {
      throw std::out_of_range("value " + std::to_string(x[i]) + " outside dimension " +
                              std::to_string(i));
    }
  }
}

Point FeatureSpace::sample(Rng& rng) const {
  Point x(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (const auto* c = std::get_if<Continuous>(&dims_[i])) {
      x[i] = rng.uniform(c->lo, c->hi);
    } else {
      x[i] = rng.integer(std::get<Categorical>(dims_[i]).arity);
    }
  }
  return x;
}

Point FeatureSpace::center() const {
  Point x(dims_.size(), 0.0);
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (const auto* c = std::get_if<Continuous>(&dims_[i])) x[i] = 0.5 * (c->lo + c->hi);
  }
  return x;
}

bool operator==(const FeatureSpace& a, const FeatureSpace& b) {
  if (a.dims_.size() != b.dims_.size()) return false;
  for (std::size_t i = 0; i < a.dims_.size(); ++i) {
    const auto& x = a.dims_[i];
    const auto& y = b.dims_[i];
    if (x.index() != y.index()) return false;
    if (const auto* c = std::get_if<Continuous>(&x)) {
      const auto& o = std::get<Continuous>(y);
      if (c->lo != o.lo || c->hi != o.hi) return false;
    } else if (std::get<Categorical>(x).arity != std::get<Categorical>(y).arity) {
      return false;
    }
  }
  return true;
}

PartialQuery PartialQuery::complete(std::span<const double> x) {
  std::vector<std::optional<double>> v(x.begin(), x.end());
  return PartialQuery(std::move(v));
}

bool PartialQuery::is_complete() const {
  for (const auto& v : values_) {
    if (!v) return false;
  }
  return true;
}

std::vector<std::size_t> PartialQuery::specified() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i]) out.push_back(i);
  }
  return out;
}

Point PartialQuery::to_point() const {
  Point x(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!values_[i]) throw std::logic_error("query has a MISSING entry at " + std::to_string(i));
    x[i] = *values_[i];
  }
  return x;
}

void PartialQuery::check(const FeatureSpace& space) const {
  if (values_.size() != space.size()) {
    throw std::out_of_range("query has " + std::to_string(values_.size()) +
                            " entries, space has " + std::to_string(space.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] && !space.admits(i, *values_[i])) {
      throw std::out_of_range("value " + std::to_string(*values_[i]) + " outside dimension " +
                              std::to_string(i));
    }
  }
}

}  // namespace mexlab
