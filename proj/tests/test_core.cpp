#include <cmath>
#include <sstream>

#include "doctest.h"
#include "mexlab/core/dataset.hpp"
#include "mexlab/core/io.hpp"
#include "mexlab/core/linalg.hpp"
#include "mexlab/core/metrics.hpp"

using namespace mexlab;

namespace {

Predictor constant(int y) {
  Predictor p;
  p.label = [y](const Point&) { return y; };
  return p;
}

Predictor threshold_1d(double t) {
  Predictor p;
  p.label = [t](const Point& x) { return x[0] <= t ? 0 : 1; };
  return p;
}

}  // namespace

TEST_CASE("zero-one distance") {
  CHECK(zero_one_distance(3, 3) == 0.0);
  CHECK(zero_one_distance(0, 1) == 1.0);
  CHECK(zero_one_distance(2, 4) == 1.0);
}

TEST_CASE("total variation distance") {
  CHECK(tv_distance({1, 0}, {1, 0}) == 0.0);
  CHECK(tv_distance({1, 0}, {0, 1}) == 1.0);
  CHECK(tv_distance({0.6, 0.4}, {0.5, 0.5}) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(tv_distance({1, 0}, {1, 0, 0}), std::invalid_argument);
}

TEST_CASE("total variation is a metric on random vectors") {
  Rng rng(11);
  auto random_pv = [&](int c) {
    ProbVector p(c);
    double s = 0;
    for (double& v : p) s += (v = rng.uniform());
    for (double& v : p) v /= s;
    return p;
  };
  for (int trial = 0; trial < 500; ++trial) {
    const int c = 2 + trial % 5;
    auto p = random_pv(c), q = random_pv(c), r = random_pv(c);
    CHECK(tv_distance(p, q) == doctest::Approx(tv_distance(q, p)));
    CHECK(tv_distance(p, p) == 0.0);
    CHECK(tv_distance(p, r) <= tv_distance(p, q) + tv_distance(q, r) + 1e-12);
    CHECK(tv_distance(p, q) >= 0.0);
    CHECK(tv_distance(p, q) <= 1.0);
  }
}

TEST_CASE("feature space invariants are enforced") {
  CHECK_THROWS_AS(FeatureSpace({Continuous{1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(FeatureSpace({Categorical{1}}), std::invalid_argument);
  CHECK_THROWS_AS(FeatureSpace(std::vector<FeatureKind>{}), std::invalid_argument);
  FeatureSpace s({Continuous{0, 1}, Categorical{3}});
  CHECK(s.admits(0, 0.5));
  CHECK_FALSE(s.admits(0, 1.5));
  CHECK(s.admits(1, 2));
  CHECK_FALSE(s.admits(1, 3));
  CHECK_FALSE(s.admits(1, 0.5));
}

TEST_CASE("partial queries") {
  PartialQuery q = PartialQuery::missing(3);
  CHECK_FALSE(q.is_complete());
  CHECK(q.specified().empty());
  CHECK_THROWS_AS(q.to_point(), std::logic_error);
  q.set(0, 0.1);
  q.set(1, 0.2);
  q.set(2, 0.3);
  CHECK(q.is_complete());
  CHECK(q.to_point() == Point{0.1, 0.2, 0.3});
}

TEST_CASE("r_test") {
  FeatureSpace s = FeatureSpace::box(1, -3, 3);
  Dataset data{s, 2, {}, {}, {}};
  for (int i = 0; i < 100; ++i) data.rows.push_back({{-2.97 + 0.06 * i}, 0});
  for (std::size_t i = 0; i < data.rows.size(); ++i) data.test.push_back(i);
  const Predictor f = threshold_1d(0.0);
  CHECK(r_test(f, f, data, ErrorMode::Labels) == 0.0);
  CHECK(r_test(constant(0), constant(1), data, ErrorMode::Labels) == 1.0);

  // Shifting the boundary by 1.5: exhaustive count of disagreeing grid points.
  const Predictor g = threshold_1d(1.5);
  int disagree = 0;
  for (const auto& r : data.rows) disagree += f.label(r.x) != g.label(r.x);
  CHECK(r_test(f, g, data, ErrorMode::Labels) == doctest::Approx(disagree / 100.0));

  Dataset empty = data;
  empty.test.clear();
  CHECK_THROWS_AS(r_test(f, f, empty, ErrorMode::Labels), std::invalid_argument);
}

TEST_CASE("r_unif") {
  FeatureSpace unit = FeatureSpace::box(1, 0, 1);
  const Predictor f = threshold_1d(0.4), g = threshold_1d(0.6);
  CHECK(r_unif(f, f, unit, 1000, 3) == 0.0);
  CHECK(r_unif(constant(0), constant(1), unit, 1000, 3) == 1.0);
  CHECK(r_unif(f, g, unit, 10'000, 5) == doctest::Approx(0.2).epsilon(0.1));
  CHECK(std::abs(r_unif(f, g, unit, 10'000, 5) - 0.2) <= 0.02);
  // Fixed seed replays bit for bit.
  CHECK(r_unif(f, g, unit, 10'000, 9) == r_unif(f, g, unit, 10'000, 9));
}

TEST_CASE("uniform sampler marginals over a categorical dimension") {
  FeatureSpace s({Categorical{4}});
  auto pts = uniform_points(s, 10'000, 21);
  int counts[4] = {};
  for (const auto& p : pts) counts[static_cast<int>(p[0])]++;
  for (int c : counts) CHECK(std::abs(c / 10'000.0 - 0.25) <= 0.03);
}

TEST_CASE("argmax breaks ties toward the lowest index") {
  CHECK(argmax({0.25, 0.25, 0.25, 0.25}) == 0);
  CHECK(argmax({0.2, 0.4, 0.4}) == 1);
  CHECK(is_prob_vector({0.3, 0.7}));
  CHECK_FALSE(is_prob_vector({0.3, 0.8}));
}

TEST_CASE("dataset split and validation") {
  FeatureSpace s = FeatureSpace::box(2);
  Dataset d{s, 2, {}, {}, {}};
  for (int i = 0; i < 50; ++i) d.rows.push_back({{0, 0}, i % 2});
  d.split(0.7, 4);
  CHECK(d.train.size() == 35);
  CHECK(d.test.size() == 15);
  CHECK_NOTHROW(d.validate());
  d.test.push_back(d.train.front());
  CHECK_THROWS(d.validate());
}

TEST_CASE("dataset CSV and schema round trip") {
  FeatureSpace s({Continuous{-1, 1}, Categorical{4}});
  Dataset d{s, 3, {{{0.125, 2}, 1}, {{-0.3333333333333333, 0}, 2}, {{1, 3}, 0}}, {}, {}};
  std::ostringstream out;
  write_dataset_csv(out, d);
  CHECK(out.str().rfind("f0,f1,label\n", 0) == 0);
  std::istringstream in(out.str());
  Dataset back = read_dataset_csv(in, s, 3);
  REQUIRE(back.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.rows[i].x == d.rows[i].x);
    CHECK(back.rows[i].y == d.rows[i].y);
  }
  const auto j = schema_to_json(s, 3);
  CHECK(j.dump() ==
        R"({"classes":3,"dims":[{"hi":1.0,"kind":"continuous","lo":-1.0},{"arity":4,"kind":"categorical"}]})");
  CHECK(space_from_json(j) == s);
}

TEST_CASE("linear solves") {
  Matrix a(3, 3);
  const double vals[9] = {2, 1, -1, -3, -1, 2, -2, 1, 2};
  for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = vals[i];
  auto x = solve_linear(a, {8, -11, -3});
  CHECK(x[0] == doctest::Approx(2));
  CHECK(x[1] == doctest::Approx(3));
  CHECK(x[2] == doctest::Approx(-1));

  Matrix sing(2, 2);
  sing(0, 0) = 1;
  sing(0, 1) = 2;
  sing(1, 0) = 2;
  sing(1, 1) = 4;
  CHECK_THROWS_AS(solve_linear(sing, {1, 2}), SingularMatrix);

  Matrix n(1, 2);
  n(0, 0) = 1;
  n(0, 1) = 1;
  auto v = null_vector(n);
  CHECK(std::abs(v[0] + v[1]) < 1e-12);
  CHECK(norm2(v) == doctest::Approx(1));
}
