#include <stdexcept>

#include "doctest.h"
#include "mexlab/harness/synthetic.hpp"
#include "mexlab/improper/improper.hpp"
#include "mexlab/models/predict.hpp"

using namespace mexlab;

TEST_CASE("zero hidden units are rejected") {
  ModelOracle o(BinaryLR{{1.0, 1.0}, 0.0}, FeatureSpace::box(2), DisclosurePolicy::probabilities());
  CHECK_THROWS_AS(improper_extract(o, 0, {1.0, 3}, extraction_config(FamilyKind::MLP)), std::invalid_argument);
  CHECK(o.queries() == 0);
}

TEST_CASE("labels-only oracles are rejected") {
  ModelOracle o(BinaryLR{{1.0, 1.0}, 0.0}, FeatureSpace::box(2), DisclosurePolicy::labels_only());
  CHECK_THROWS_AS(improper_extract(o, 4, {1.0, 3}, extraction_config(FamilyKind::MLP)), std::invalid_argument);
}

TEST_CASE("wide MLP against a tiny binary target") {
  const Dataset data = gen_synthetic("moons", 800, 8);
  OptimizerConfig tc;
  tc.seed = 8;
  const ModelSpec target = fit_logistic_family(FamilyKind::BinaryLR, data, tc).model;
  const std::size_t k = parameter_count(target);

  ModelOracle po(target, data.space, DisclosurePolicy::probabilities());
  const BinaryLR proper = extract_binary_lr(po);
  ExtractionReport pr;
  score_extraction(pr, as_predictor(target), as_predictor(proper), &data, data.space, 10000, 2);

  ModelOracle io(target, data.space, DisclosurePolicy::probabilities());
  const auto imp = improper_extract(io, 50, {20.0, k}, extraction_config(FamilyKind::MLP, 8));
  CHECK(imp.report.queries_used == 60);
  CHECK(imp.surrogate_params == 2 * 50 + 50 * 2 + 50 + 2);
  CHECK(imp.target_params == 6);  // a two-class softmax over two inputs
  CHECK(imp.param_ratio == doctest::Approx(252.0 / 6.0));
  ExtractionReport ir;
  score_extraction(ir, as_predictor(target), as_predictor(ModelSpec(imp.model)), &data, data.space, 10000, 2);
  CHECK(1.0 - ir.r_unif >= 0.99);
  CHECK(*ir.r_unif_tv >= 10.0 * *pr.r_unif_tv);
}
