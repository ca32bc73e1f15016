#pragma once

#include <cstdint>
#include <functional>

#include "mexlab/core/dataset.hpp"

namespace mexlab {

/// Anything that can label (and optionally score) a complete query.
struct Predictor {
  std::function<int(const Point&)> label;
  std::function<ProbVector(const Point&)> proba;  // empty when unsupported
};

enum class ErrorMode { Labels, TotalVariation };

double zero_one_distance(int y, int y2);

// Half the l1 distance between two probability vectors.
double tv_distance(const ProbVector& p, const ProbVector& q);

// Mean distance between f and fhat over the test partition of data.
double r_test(const Predictor& f, const Predictor& fhat, const Dataset& data, ErrorMode mode);

// Same, over an explicit point set.
double mean_error(const Predictor& f, const Predictor& fhat, const std::vector<Point>& points,
                  ErrorMode mode);

inline constexpr std::size_t kDefaultUniformSamples = 10'000;

// Mean distance over n points drawn uniformly from space using seed.
double r_unif(const Predictor& f, const Predictor& fhat, const FeatureSpace& space,
              std::size_t n = kDefaultUniformSamples, std::uint64_t seed = 0,
              ErrorMode mode = ErrorMode::Labels);

std::vector<Point> uniform_points(const FeatureSpace& space, std::size_t n, std::uint64_t seed);

}  // namespace mexlab
