#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "mexlab/featrev/featrev.hpp"
#include "mexlab/models/predict.hpp"

using namespace mexlab;

namespace {

PartialQuery one(std::size_t d, std::size_t i, double v) {
  PartialQuery q = PartialQuery::missing(d);
  q.set(i, v);
  return q;
}

DisclosurePolicy partial_probs() {
  DisclosurePolicy p = DisclosurePolicy::probabilities();
  p.allow_partial = true;
  return p;
}

}  // namespace

TEST_CASE("one-hot and bin indicators") {
  FeatureExtractor ex{FeatureSpace({Categorical{3}, Continuous{0.0, 1.0}}),
                      {OneHotDim{3}, QuantileBinDim{{0.25, 0.5, 0.75}}}};
  ex.validate();
  CHECK(ex.output_dim() == 7);
  CHECK(ex.offset(1) == 3);
  PartialQuery q = PartialQuery::missing(2);
  q.set(0, 1);
  q.set(1, 0.6);
  CHECK(apply_extractor(ex, q) == Point{0, 1, 0, 0, 0, 1, 0});
  CHECK(apply_extractor(ex, one(2, 1, 0.6)) == Point{0, 0, 0, 0, 0, 1, 0});
  CHECK(apply_extractor(ex, PartialQuery::missing(2)) == Point(7, 0.0));
}

TEST_CASE("boundary values go to the left bin") {
  const std::vector<double> b{0.25, 0.5, 0.75};
  CHECK(bin_index(b, 0.25) == 0);
  CHECK(bin_index(b, 0.2500001) == 1);
  CHECK(bin_index(b, 0.0) == 0);
  CHECK(bin_index(b, 1.0) == 3);
  CHECK(bin_index({}, 0.3) == 0);
}

TEST_CASE("extractor input checks") {
  FeatureExtractor ex{FeatureSpace::box(1, 0.0, 1.0), {QuantileBinDim{{0.5}}}};
  CHECK_THROWS_AS(apply_extractor(ex, one(1, 0, 2.0)), std::out_of_range);
  ex.dims[0] = QuantileBinDim{{0.5, 0.5}};
  CHECK_THROWS_AS(ex.validate(), std::invalid_argument);
  ex.dims[0] = QuantileBinDim{{1.5}};
  CHECK_THROWS_AS(ex.validate(), std::invalid_argument);
  ex.dims[0] = OneHotDim{2};
  CHECK_THROWS_AS(ex.validate(), std::invalid_argument);
}

TEST_CASE("quantile boundaries") {
  std::vector<double> v;
  for (int i = 0; i < 100; ++i) v.push_back(i / 100.0);
  CHECK(fit_quantile_bins(v, 4) == std::vector<double>{0.25, 0.5, 0.75});
  CHECK(fit_quantile_bins(v, 1).empty());
  CHECK(fit_quantile_bins(std::vector<double>(10, 3.0), 4).empty());
  CHECK_THROWS_AS(fit_quantile_bins(v, 0), std::invalid_argument);
}

TEST_CASE("extractor JSON round trip") {
  FeatureExtractor ex{FeatureSpace({Categorical{4}, Continuous{-2.0, 2.0}, Continuous{0.0, 1.0}}),
                      {OneHotDim{4}, QuantileBinDim{{-1.0, 0.5}}, IdentityDim{}}};
  const FeatureExtractor back = extractor_from_json(extractor_to_json(ex));
  CHECK(back.input == ex.input);
  CHECK(back.output_dim() == 8);
  CHECK(std::get<QuantileBinDim>(back.dims[1]).boundaries == std::vector<double>{-1.0, 0.5});
}

TEST_CASE("bins of a four-bin target are found within eps") {
  FeatureExtractor ex{FeatureSpace::box(1, 0.0, 1.0), {QuantileBinDim{{0.25, 0.5, 0.75}}}};
  const BinaryLR model{{-1.0, 0.5, 2.0, -0.3}, 0.1};
  ModelOracle o(model, ex.input, partial_probs(), as_transform(ex));
  const BinSearch bs = recover_bins(o, 0, 1e-3);
  REQUIRE(bs.boundaries.size() == 3);
  CHECK(std::abs(bs.boundaries[0] - 0.25) <= 1e-3);
  CHECK(std::abs(bs.boundaries[1] - 0.5) <= 1e-3);
  CHECK(std::abs(bs.boundaries[2] - 0.75) <= 1e-3);

  // Feeding the recovered boundaries back finds the same set.
  FeatureExtractor again{ex.input, {QuantileBinDim{bs.boundaries}}};
  ModelOracle o2(model, ex.input, partial_probs(), as_transform(again));
  CHECK(recover_bins(o2, 0, 1e-3).boundaries == bs.boundaries);
}

TEST_CASE("equal neighbouring coefficients hide a boundary") {
  FeatureExtractor ex{FeatureSpace::box(1, 0.0, 1.0), {QuantileBinDim{{0.25, 0.5, 0.75}}}};
  ModelOracle o(BinaryLR{{1.0, 1.0, -1.0, 2.0}, 0.0}, ex.input, partial_probs(), as_transform(ex));
  const BinSearch bs = recover_bins(o, 0, 1e-3);
  CHECK(bs.boundaries.size() == 2);
}

TEST_CASE("a single bin has no boundaries") {
  FeatureExtractor ex{FeatureSpace::box(1, 0.0, 1.0), {QuantileBinDim{{}}}};
  ModelOracle o(BinaryLR{{1.5}, 0.0}, ex.input, partial_probs(), as_transform(ex));
  CHECK(recover_bins(o, 0, 1e-3).boundaries.empty());
}

TEST_CASE("two one-hot inputs cost seven queries") {
  FeatureExtractor ex{FeatureSpace({Categorical{3}, Categorical{3}}), {OneHotDim{3}, OneHotDim{3}}};
  const BinaryLR truth{{0.4, -1.2, 2.0, 0.0, 0.7, -0.5}, -0.25};
  ModelOracle o(truth, ex.input, partial_probs(), as_transform(ex));
  const auto got = extract_composed_linear(o, ex);
  CHECK(got.queries == 7);
  CHECK_FALSE(got.dense);
  const auto& lr = std::get<BinaryLR>(got.model);
  for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(lr.w[j] - truth.w[j]) < 1e-6);
  CHECK(std::abs(lr.beta - truth.beta) < 1e-6);
}

TEST_CASE("bias from the all-missing query") {
  FeatureExtractor ex{FeatureSpace({Categorical{2}}), {OneHotDim{2}}};
  ModelOracle o(BinaryLR{{1.0, 2.0}, 0.8}, ex.input, partial_probs(), as_transform(ex));
  const auto r = o.query(PartialQuery::missing(1));
  CHECK(logit((*r.probs)[1]) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("composed softmax with bins, one-hot and identity dims") {
  FeatureExtractor ex{FeatureSpace({Continuous{0.0, 1.0}, Categorical{3}, Continuous{-2.0, 1.0}}),
                      {QuantileBinDim{{0.25, 0.5, 0.75}}, OneHotDim{3}, IdentityDim{}}};
  SoftmaxLR truth;
  truth.w = {{0.1, -0.4, 0.9, 0.2, 1.0, 0.0, -0.5, 0.3},
             {-0.6, 0.2, 0.0, 1.1, -0.2, 0.4, 0.8, -0.1},
             {0.5, 0.5, -0.7, 0.3, 0.0, -1.0, 0.2, 0.6}};
  truth.betas = {0.2, -0.1, 0.4};
  ModelOracle o(truth, ex.input, partial_probs(), as_transform(ex));
  const BinSearch bs = recover_bins(o, 0, 1e-3);
  const std::size_t before = o.queries();
  const auto got = extract_composed_linear(o, ex, {bs});
  CHECK(got.reused == 4);
  // Bias, three categories and the identity coordinate.
  CHECK(o.queries() - before == 5);
  const Predictor f = as_predictor(truth);
  FeatureExtractor found = ex;
  found.dims[0] = QuantileBinDim{bs.boundaries};
  for (const Point& x : uniform_points(ex.input, 2000, 4)) {
    const auto p = predict_proba(truth, apply_extractor(ex, PartialQuery::complete(x)));
    const auto q = predict_proba(got.model, apply_extractor(found, PartialQuery::complete(x)));
    CHECK(tv_distance(p, q) < 1e-6);
  }
}

TEST_CASE("dense fallback without partial queries") {
  FeatureExtractor ex{FeatureSpace({Categorical{3}, Continuous{0.0, 1.0}}),
                      {OneHotDim{3}, QuantileBinDim{{0.5}}}};
  const BinaryLR truth{{0.3, -0.8, 1.2, 0.5, -0.4}, 0.2};
  ModelOracle o(truth, ex.input, DisclosurePolicy::probabilities(), as_transform(ex));
  const auto got = extract_composed_linear(o, ex, {}, 3);
  CHECK(got.dense);
  for (const Point& x : uniform_points(ex.input, 500, 2)) {
    const Point fx = apply_extractor(ex, PartialQuery::complete(x));
    CHECK(tv_distance(predict_proba(truth, fx), predict_proba(got.model, fx)) < 1e-6);
  }
}

TEST_CASE("composed extraction needs probabilities") {
  FeatureExtractor ex{FeatureSpace({Categorical{2}}), {OneHotDim{2}}};
  DisclosurePolicy p = DisclosurePolicy::labels_only();
  p.allow_partial = true;
  ModelOracle o(BinaryLR{{1.0, 2.0}, 0.0}, ex.input, p, as_transform(ex));
  CHECK_THROWS_AS(extract_composed_linear(o, ex), std::invalid_argument);
}
