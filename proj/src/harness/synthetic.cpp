#include "mexlab/harness/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mexlab/core/rng.hpp"

namespace mexlab {

namespace {

// Min-max scaling of every feature onto [-1, 1].
void scale_to_box(std::vector<LabeledPoint>& rows, std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) {
    double lo = rows[0].x[j], hi = rows[0].x[j];
    for (const auto& r : rows) {
      lo = std::min(lo, r.x[j]);
      hi = std::max(hi, r.x[j]);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    for (auto& r : rows) r.x[j] = std::clamp(2.0 * (r.x[j] - lo) / span - 1.0, -1.0, 1.0);
  }
}

std::vector<LabeledPoint> gaussian_clusters(std::size_t n, std::size_t d, int centers, double sd,
                                            Rng& rng) {
  std::vector<Point> mu(centers, Point(d));
  for (auto& m : mu)
    for (double& v : m) v = rng.uniform(-10.0, 10.0);
  std::vector<LabeledPoint> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % centers);
    Point x(d);
    for (std::size_t j = 0; j < d; ++j) x[j] = rng.normal(mu[c][j], sd);
    rows.push_back({std::move(x), c});
  }
  return rows;
}

}  // namespace

std::size_t default_size(const std::string& name) { return name == "five_class" ? 1000 : 5000; }

Dataset gen_synthetic(const std::string& name, std::size_t n, std::uint64_t seed,
                      const SyntheticOptions& opt) {
  if (n < 10) throw std::invalid_argument("synthetic datasets need at least 10 records");
  Rng rng(seed);
  std::vector<LabeledPoint> rows;
  std::size_t d = 2;
  int classes = 2;
  const double pi = std::numbers::pi;
  if (name == "circles") {
    const double noise = opt.noise < 0 ? 0.1 : opt.noise;
    const double factor = 0.5;  // inner radius relative to the outer ring
    for (std::size_t i = 0; i < n; ++i) {
      const int y = static_cast<int>(i % 2);
      const double t = rng.uniform(0.0, 2 * pi), r = y == 0 ? 1.0 : factor;
      rows.push_back({{r * std::cos(t) + rng.normal(0, noise), r * std::sin(t) + rng.normal(0, noise)}, y});
    }
  } else if (name == "moons") {
    const double noise = opt.noise < 0 ? 0.1 : opt.noise;
    for (std::size_t i = 0; i < n; ++i) {
      const int y = static_cast<int>(i % 2);
      const double t = rng.uniform(0.0, pi);
      const double x0 = y == 0 ? std::cos(t) : 1.0 - std::cos(t);
      const double x1 = y == 0 ? std::sin(t) : 0.5 - std::sin(t);
      rows.push_back({{x0 + rng.normal(0, noise), x1 + rng.normal(0, noise)}, y});
    }
  } else if (name == "blobs") {
    classes = opt.centers < 0 ? 3 : opt.centers;
    rows = gaussian_clusters(n, 2, classes, opt.noise < 0 ? 1.0 : opt.noise, rng);
  } else if (name == "five_class") {
    classes = opt.centers < 0 ? 5 : opt.centers;
    d = 20;
    rows = gaussian_clusters(n, d, classes, opt.noise < 0 ? 4.0 : opt.noise, rng);
  } else {
    throw std::invalid_argument("unknown synthetic dataset: " + name);
  }
  if (classes < 2) throw std::invalid_argument("synthetic datasets need at least two classes");
  // Cluster and ring assignment alternates by index; shuffle so row order
  // carries no label information.
  shuffle(rows, rng);
  scale_to_box(rows, d);
  Dataset data{FeatureSpace::box(d), classes, std::move(rows), {}, {}};
  data.split(opt.train_fraction, rng.fork());
  data.validate();
  return data;
}

Dataset adult_shaped(std::size_t n, std::uint64_t seed) {
  if (n < 10) throw std::invalid_argument("adult_shaped needs at least 10 records");
  Rng rng(seed);
  // age, fnlwgt, education-num, capital-gain, capital-loss, hours-per-week
  const std::vector<std::pair<double, double>> numeric{
      {17, 90}, {12285, 1490400}, {1, 16}, {0, 99999}, {0, 4356}, {1, 99}};
  // workclass, education, marital, occupation, relationship, race, sex, country
  const std::vector<int> arities{9, 16, 7, 15, 6, 5, 2, 42};
  std::vector<FeatureKind> kinds;
  for (auto [lo, hi] : numeric) kinds.push_back(Continuous{lo, hi});
  for (int k : arities) kinds.push_back(Categorical{k});
  FeatureSpace space(kinds);

  // Hidden rule: a score over standardised numerics plus per-category offsets.
  std::vector<double> wn(numeric.size());
  for (double& w : wn) w = rng.normal();
  std::vector<std::vector<double>> wc;
  for (int k : arities) {
    std::vector<double> row(k);
    for (double& v : row) v = rng.normal(0, 0.7);
    wc.push_back(std::move(row));
  }
  std::vector<LabeledPoint> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point x(space.size());
    double score = 0.0;
    for (std::size_t j = 0; j < numeric.size(); ++j) {
      auto [lo, hi] = numeric[j];
      // Skewed draws put the quantiles away from an even grid.
      const double u = std::pow(rng.uniform(), 1.0 + j % 3);
      x[j] = lo + (hi - lo) * u;
      score += wn[j] * (2 * u - 1);
    }
    for (std::size_t j = 0; j < arities.size(); ++j) {
      const int v = rng.integer(arities[j]);
      x[numeric.size() + j] = v;
      score += wc[j][v];
    }
    const int y = score + rng.normal(0, 0.5) > 0 ? 1 : 0;
    rows.push_back({std::move(x), y});
  }
  Dataset data{space, 2, std::move(rows), {}, {}};
  data.split(0.7, rng.fork());
  data.validate();
  return data;
}

}  // namespace mexlab
