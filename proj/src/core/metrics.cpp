#include "mexlab/core/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace mexlab {

double zero_one_distance(int y, int y2) { return y == y2 ? 0.0 : 1.0; }

double tv_distance(const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

namespace {

double point_error(const Predictor& f, const Predictor& fhat, const Point& x, ErrorMode mode) {
  if (mode == ErrorMode::Labels) return zero_one_distance(f.label(x), fhat.label(x));
  if (!f.proba || !fhat.proba) {
    throw std::invalid_argument("total-variation error needs probability outputs");
  }
  return tv_distance(f.proba(x), fhat.proba(x));
}

}  // namespace

double mean_error(const Predictor& f, const Predictor& fhat, const std::vector<Point>& points,
                  ErrorMode mode) {
  if (points.empty()) throw std::invalid_argument("error over an empty point set");
  double total = 0.0;
  for (const auto& x : points) total += point_error(f, fhat, x, mode);
  return total / static_cast<double>(points.size());
}

double r_test(const Predictor& f, const Predictor& fhat, const Dataset& data, ErrorMode mode) {
  if (data.test.empty()) throw std::invalid_argument("r_test: empty test partition");
  double total = 0.0;
  for (std::size_t i : data.test) total += point_error(f, fhat, data.rows[i].x, mode);
  return total / static_cast<double>(data.test.size());
}

std::vector<Point> uniform_points(const FeatureSpace& space, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(space.sample(rng));
  return out;
}

double r_unif(const Predictor& f, const Predictor& fhat, const FeatureSpace& space, std::size_t n,
              std::uint64_t seed, ErrorMode mode) {
  if (n == 0) throw std::invalid_argument("r_unif: n must be positive");
  Rng rng(seed);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += point_error(f, fhat, space.sample(rng), mode);
  return total / static_cast<double>(n);
}

}  // namespace mexlab
