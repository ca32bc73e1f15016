#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "mexlab/attacks/eqsolve.hpp"
#include "mexlab/attacks/report.hpp"
#include "mexlab/harness/synthetic.hpp"
#include "mexlab/models/predict.hpp"

using namespace mexlab;

TEST_CASE("binary LR is recovered from d + 1 queries") {
  const BinaryLR truth{{2.0, -3.0}, 0.5};
  ModelOracle o(truth, FeatureSpace::box(2), DisclosurePolicy::probabilities());
  BinaryLrInfo info;
  const BinaryLR got = extract_binary_lr(o, 0, &info);
  CHECK(o.queries() == 3);
  CHECK(info.retries == 0);
  CHECK_FALSE(info.approximate);
  CHECK(std::abs(got.w[0] - 2.0) < 1e-9);
  CHECK(std::abs(got.w[1] + 3.0) < 1e-9);
  CHECK(std::abs(got.beta - 0.5) < 1e-9);
}

TEST_CASE("all-zero binary LR comes back as zero") {
  ModelOracle o(BinaryLR{{0.0, 0.0, 0.0}, 0.0}, FeatureSpace::box(3), DisclosurePolicy::probabilities());
  const BinaryLR got = extract_binary_lr(o);
  for (double w : got.w) CHECK(std::abs(w) < 1e-12);
  CHECK(std::abs(got.beta) < 1e-12);
}

TEST_CASE("box without the origin uses centre steps") {
  const BinaryLR truth{{0.3, -0.2}, 1.0};
  ModelOracle o(truth, FeatureSpace::box(2, 2.0, 6.0), DisclosurePolicy::probabilities());
  const BinaryLR got = extract_binary_lr(o);
  CHECK(std::abs(got.w[0] - 0.3) < 1e-8);
  CHECK(std::abs(got.w[1] + 0.2) < 1e-8);
  CHECK(std::abs(got.beta - 1.0) < 1e-8);
}

TEST_CASE("rounded outputs mark the solve approximate") {
  ModelOracle o(BinaryLR{{1.0}, 0.0}, FeatureSpace::box(1), DisclosurePolicy::probabilities(4));
  BinaryLrInfo info;
  extract_binary_lr(o, 0, &info);
  CHECK(info.approximate);
}

TEST_CASE("binary LR extraction needs probabilities") {
  ModelOracle o(BinaryLR{{1.0}, 0.0}, FeatureSpace::box(1), DisclosurePolicy::labels_only());
  CHECK_THROWS_AS(extract_binary_lr(o), std::invalid_argument);
}

TEST_CASE("budget arithmetic") {
  CHECK(BudgetSpec{1.0, 530}.budget() == 530);
  CHECK(BudgetSpec{0.5, 9}.budget() == 5);
  CHECK(BudgetSpec{5.0, 2225}.budget() == 11125);
  CHECK_THROWS_AS((BudgetSpec{0.0, 10}.budget()), std::invalid_argument);
  CHECK_THROWS_AS((BudgetSpec{-1.0, 10}.budget()), std::invalid_argument);
  CHECK_THROWS_AS((BudgetSpec{1.0, 0}.budget()), std::invalid_argument);
}

TEST_CASE("unknown counts per family") {
  CHECK(family_unknowns(FamilyKind::BinaryLR, 10, 2) == 11);
  CHECK(family_unknowns(FamilyKind::Softmax, 105, 5) == 530);
  CHECK(family_unknowns(FamilyKind::OvR, 105, 5) == 530);
  FamilyOptions h20;
  h20.hidden = 20;
  CHECK(family_unknowns(FamilyKind::MLP, 105, 5, h20) == 2225);
  FamilyOptions s8;
  s8.representers = 8;
  CHECK(family_unknowns(FamilyKind::KernelLR, 2, 3, s8) == 3 * 8 + 3 + 8 * 2);
}

TEST_CASE("softmax at alpha = 1 agrees everywhere") {
  const Dataset data = gen_synthetic("blobs", 600, 3);
  OptimizerConfig tc;
  tc.seed = 3;
  const ModelSpec target = fit_logistic_family(FamilyKind::Softmax, data, tc).model;
  ModelOracle o(target, data.space, DisclosurePolicy::probabilities());
  const BudgetSpec b{1.0, family_unknowns(FamilyKind::Softmax, 2, 3)};
  const auto fit = extract_by_loss_min(FamilyKind::Softmax, o, b, extraction_config(FamilyKind::Softmax, 3));
  CHECK(o.queries() == 9);
  ExtractionReport r;
  score_extraction(r, as_predictor(target), as_predictor(fit.model), &data, data.space, 10000, 1);
  CHECK(r.r_test == 0.0);
  CHECK(r.r_unif == 0.0);
  REQUIRE(r.r_unif_tv);
  CHECK(*r.r_unif_tv < 1e-6);
}

TEST_CASE("all-zero softmax yields uniform probabilities") {
  SoftmaxLR zero{{{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}}, {0.0, 0.0, 0.0}};
  ModelOracle o(zero, FeatureSpace::box(2), DisclosurePolicy::probabilities());
  const auto fit = extract_by_loss_min(FamilyKind::Softmax, o, {1.0, 9}, extraction_config(FamilyKind::Softmax));
  const ProbVector p = predict_proba(fit.model, Point{0.4, -0.7});
  for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("under-assumed representer count is flagged") {
  const Dataset data = gen_synthetic("blobs", 400, 1);
  OptimizerConfig tc;
  tc.seed = 1;
  FamilyOptions fam;
  fam.representers = 8;
  const ModelSpec target = fit_logistic_family(FamilyKind::KernelLR, data, tc, fam).model;
  ModelOracle o(target, data.space, DisclosurePolicy::probabilities());
  FamilyOptions one;
  one.representers = 1;
  auto cfg = extraction_config(FamilyKind::KernelLR, 1);
  cfg.max_epochs = 200;
  const auto ex = extract_klr_representers(o, 1, 1.0, {2.0, family_unknowns(FamilyKind::KernelLR, 2, 3, one)}, cfg);
  CHECK(ex.model.representers.size() == 1);
  const auto leak = leakage_report(std::get<KernelLR>(target).representers, ex);
  CHECK(leak.underestimated);
  CHECK(leak.nearest_l1.size() == 8);
  CHECK(leak.weight_norms.size() == 1);
}

TEST_CASE("leakage report needs representers") {
  KlrExtraction empty;
  CHECK_THROWS(leakage_report({}, empty));
}
