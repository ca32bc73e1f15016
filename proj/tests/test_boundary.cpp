#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "mexlab/attacks/boundary.hpp"
#include "mexlab/harness/synthetic.hpp"
#include "mexlab/models/poly.hpp"
#include "mexlab/models/predict.hpp"
#include "mexlab/training/svm.hpp"

using namespace mexlab;

namespace {

double agreement(const Predictor& f, const Predictor& g, const FeatureSpace& sp) {
  return 1.0 - r_unif(f, g, sp, 10000, 11);
}

// Labels-only oracle answering class 1 inside the disc x.x <= r2.
SVM disc_svm(double r2) {
  // K(x, s) = (x.s + 1)^2 with s = +-e1, +-e2 and alpha = 1/2 sums to
  // x1^2 + x2^2 + 2, so beta = -(2 + r2) puts the boundary on the circle.
  SVM s;
  s.kernel = PolyKernel{2};
  s.support_vectors = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  s.dual_alphas = {-0.5, -0.5, -0.5, -0.5};
  s.beta = 2.0 + r2;
  return s;
}

}  // namespace

TEST_CASE("Lowd-Meek recovers a diagonal hyperplane") {
  const BinaryLR truth{{1.0, 1.0}, -1.0};
  ModelOracle o(truth, FeatureSpace::box(2), DisclosurePolicy::labels_only());
  const BinaryLR got = lowd_meek(o);
  const double n = std::hypot(got.w[0], got.w[1]);
  CHECK(n == doctest::Approx(1.0));
  const double cosang = (got.w[0] + got.w[1]) / (n * std::sqrt(2.0));
  CHECK(std::acos(std::min(1.0, cosang)) < 1e-3);
  CHECK(got.beta == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("Lowd-Meek on an axis-aligned boundary") {
  ModelOracle o(BinaryLR{{0.0, 5.0}, 0.0}, FeatureSpace::box(2), DisclosurePolicy::labels_only());
  const BinaryLR got = lowd_meek(o);
  CHECK(std::abs(got.w[0]) < 1e-6);
  CHECK(got.w[1] == doctest::Approx(1.0));
  CHECK(std::abs(got.beta) < 1e-6);
}

TEST_CASE("Lowd-Meek is blind to the weight scale") {
  const FeatureSpace sp = FeatureSpace::box(3);
  ModelOracle a(BinaryLR{{0.5, -1.0, 2.0}, 0.25}, sp, DisclosurePolicy::labels_only());
  ModelOracle b(BinaryLR{{5.0, -10.0, 20.0}, 2.5}, sp, DisclosurePolicy::labels_only());
  const BinaryLR ga = lowd_meek(a), gb = lowd_meek(b);
  for (std::size_t j = 0; j < 3; ++j) CHECK(ga.w[j] == doctest::Approx(gb.w[j]).epsilon(1e-6));
}

TEST_CASE("Lowd-Meek fails on a constant target") {
  ModelOracle o(BinaryLR{{0.0, 0.0}, 5.0}, FeatureSpace::box(2), DisclosurePolicy::labels_only());
  LowdMeekOptions opt;
  opt.max_probes = 50;
  CHECK_THROWS_AS(lowd_meek(o, opt), std::runtime_error);
}

TEST_CASE("quadratic boundary of a disc") {
  const FeatureSpace sp = FeatureSpace::box(2);
  const SVM target = disc_svm(0.36);
  ModelOracle o(target, sp, DisclosurePolicy::labels_only());
  const PolyBoundary got = lowd_meek_poly(o, 2);
  CHECK(got.w.size() == poly_feature_dim(2, 2));
  CHECK(agreement(as_predictor(target), got.as_predictor(), sp) >= 0.99);
}

TEST_CASE("one-dimensional x^2 = c threshold") {
  // Class 1 iff x^2 <= 0.25 via the disc construction in one dimension.
  SVM s;
  s.kernel = PolyKernel{2};
  s.support_vectors = {{1.0}, {-1.0}};
  s.dual_alphas = {-0.5, -0.5};
  s.beta = 1.0 + 0.25;
  const FeatureSpace sp = FeatureSpace::box(1);
  ModelOracle o(s, sp, DisclosurePolicy::labels_only());
  LowdMeekOptions opt;
  opt.eps = 1e-9;
  const PolyBoundary got = lowd_meek_poly(o, 2, opt);
  // Roots of the recovered quadratic.
  const auto ex = poly_exponents(1, 2);
  double a = 0, b = 0, c = 0;
  for (std::size_t j = 0; j < ex.size(); ++j) {
    const double coef = got.w[j] * std::sqrt(ex[j][0] == 1 ? 2.0 : 1.0);
    (ex[j][0] == 2 ? a : ex[j][0] == 1 ? b : c) = coef;
  }
  const double disc = std::sqrt(b * b - 4 * a * c);
  const double r1 = (-b - disc) / (2 * a), r2 = (-b + disc) / (2 * a);
  CHECK(std::abs(std::max(r1, r2) - 0.5) < 1e-6);
  CHECK(std::abs(std::min(r1, r2) + 0.5) < 1e-6);
}

TEST_CASE("degree 2 still fits a linear boundary") {
  const FeatureSpace sp = FeatureSpace::box(2);
  const BinaryLR truth{{1.0, -2.0}, 0.3};
  ModelOracle o(truth, sp, DisclosurePolicy::labels_only());
  const PolyBoundary got = lowd_meek_poly(o, 2);
  CHECK(agreement(as_predictor(truth), got.as_predictor(), sp) >= 0.99);
}

TEST_CASE("retraining spends exactly its budget") {
  const Dataset data = gen_synthetic("moons", 500, 2);
  OptimizerConfig tc;
  tc.seed = 2;
  const ModelSpec target = fit_logistic_family(FamilyKind::BinaryLR, data, tc).model;
  for (auto s : {RetrainStrategy::Uniform, RetrainStrategy::LineSearch, RetrainStrategy::Adaptive}) {
    ModelOracle o(target, data.space, DisclosurePolicy::labels_only());
    RetrainConfig rc;
    rc.strategy = s;
    rc.budget = 60;
    rc.surrogate = SurrogateSpec::logistic(FamilyKind::BinaryLR);
    int rounds_seen = 0;
    const auto res = retrain(o, rc, 2, [&](const ModelSpec&) {
      ++rounds_seen;
      return std::pair{0.0, 0.0};
    });
    CHECK(o.queries() == 60);
    CHECK(res.sample.size() == 60);
    CHECK(rounds_seen == static_cast<int>(res.curve.size()));
    CHECK(agreement(as_predictor(target), as_predictor(res.model), data.space) > 0.9);
  }
}

TEST_CASE("adaptive binary LR reaches 99% at alpha 10") {
  const Dataset data = gen_synthetic("moons", 1000, 4);
  OptimizerConfig tc;
  tc.seed = 4;
  const ModelSpec target = fit_logistic_family(FamilyKind::BinaryLR, data, tc).model;
  ModelOracle o(target, data.space, DisclosurePolicy::labels_only());
  RetrainConfig rc;
  rc.budget = 30;
  rc.surrogate = SurrogateSpec::logistic(FamilyKind::BinaryLR);
  const auto res = retrain(o, rc, 4);
  CHECK(agreement(as_predictor(target), as_predictor(res.model), data.space) >= 0.99);
}

TEST_CASE("retrain config checks") {
  RetrainConfig rc;
  rc.budget = 0;
  CHECK_THROWS_AS(rc.validate(), std::invalid_argument);
  rc.budget = 10;
  rc.rounds = 0;
  CHECK_THROWS_AS(rc.validate(), std::invalid_argument);
  CHECK(strategy_from_name("line_search") == RetrainStrategy::LineSearch);
  CHECK_THROWS_AS(strategy_from_name("greedy"), std::invalid_argument);
}

TEST_CASE("round curve CSV") {
  const std::string csv = round_curve_csv({{1, 10, 0.5, 0.25}, {2, 20, 0.125, 0.0}});
  CHECK(csv == "round,queries,r_test,r_unif\n1,10,0.5,0.25\n2,20,0.125,0\n");
}

TEST_CASE("extract-and-test picks the matching gamma") {
  const Dataset data = gen_synthetic("circles", 600, 5);
  OptimizerConfig tc;
  tc.seed = 5;
  tc.l2_lambda = 1e-3;
  const SVM target = fit_svm(RbfKernel{1.0}, data, tc);
  ModelOracle o(target, data.space, DisclosurePolicy::labels_only());
  std::vector<Candidate> cands;
  for (double g : {0.1, 1.0, 10.0}) {
    cands.push_back({"gamma=" + std::to_string(g), [g, tc](const std::vector<LabeledPoint>& rows) {
                       return ModelSpec(fit_surrogate(SurrogateSpec::svm(RbfKernel{g}), FeatureSpace::box(2), 2, rows, tc));
                     }});
  }
  const auto res = extract_and_test(o, cands, 300, 300, 5);
  CHECK(o.queries() == 600);
  CHECK(res.scoreboard.size() == 3);
  CHECK(res.best_name == cands[1].name);
}

TEST_CASE("single candidate is returned as is") {
  ModelOracle o(BinaryLR{{1.0, 0.0}, 0.0}, FeatureSpace::box(2), DisclosurePolicy::labels_only());
  std::vector<Candidate> one{{"only", [](const std::vector<LabeledPoint>&) { return ModelSpec(BinaryLR{{0.0, 1.0}, 0.0}); }}};
  CHECK(extract_and_test(o, one, 10, 10, 0).best_name == "only");
}

TEST_CASE("softmax and OvR surrogates tie on labels") {
  const Dataset data = gen_synthetic("blobs", 600, 6);
  OptimizerConfig tc;
  tc.seed = 6;
  const ModelSpec target = fit_logistic_family(FamilyKind::Softmax, data, tc).model;
  ModelOracle o(target, data.space, DisclosurePolicy::labels_only());
  std::vector<Candidate> cands;
  for (auto f : {FamilyKind::Softmax, FamilyKind::OvR}) {
    cands.push_back({family_name(f), [f, &data, tc](const std::vector<LabeledPoint>& rows) {
                       return fit_surrogate(SurrogateSpec::logistic(f), data.space, 3, rows, tc);
                     }});
  }
  const auto res = extract_and_test(o, cands, 400, 400, 6);
  CHECK(res.scoreboard[0].probe_disagreement < 0.03);
  CHECK(res.scoreboard[1].probe_disagreement < 0.03);
}
