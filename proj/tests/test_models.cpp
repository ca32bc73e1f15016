#include <cmath>

#include "doctest.h"
#include "mexlab/core/rng.hpp"
#include "mexlab/harness/tree_corpus.hpp"
#include "mexlab/models/poly.hpp"
#include "mexlab/models/predict.hpp"
#include "mexlab/models/serialize.hpp"

using namespace mexlab;

TEST_CASE("sigmoid") {
  CHECK(sigmoid(0) == 0.5);
  CHECK(sigmoid(40) > 1 - 1e-15);
  CHECK(sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(sigmoid(-1) < sigmoid(-0.5));
  CHECK(logit(sigmoid(1.25)) == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("predict_proba per model class") {
  SoftmaxLR zero{Weights(4, std::vector<double>(3, 0.0)), std::vector<double>(4, 0.0)};
  for (double p : predict_proba(zero, {0.3, -0.2, 0.9})) CHECK(p == doctest::Approx(0.25));
  CHECK(predict_class(zero, {0.3, -0.2, 0.9}) == 0);

  BinaryLR lr{{2, -3}, 0.5};
  auto p = predict_proba(lr, {1, 1});
  CHECK(p[0] == doctest::Approx(0.62246).epsilon(1e-5));
  CHECK(p[1] == doctest::Approx(0.37754).epsilon(1e-5));
  CHECK(predict_class(lr, {1, 1}) == 0);

  KernelLR klr{{{1.0}, {0.0}}, {0.0, 0.0}, {{0.2, 0.4}}, 3.0};
  auto pk = predict_proba(klr, {0.2, 0.4});
  // K(x, x) = 1 enters the softmax: [e^1, e^0] normalised.
  CHECK(pk[0] == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1.0)));

  SVM svm;
  svm.w = {1, 1};
  svm.beta = -1;
  CHECK(predict_class(svm, {1, 1}) == 1);
  CHECK(predict_class(svm, {0, 0}) == 0);
  CHECK_THROWS_AS(predict_proba(svm, {1, 1}), std::invalid_argument);
}

TEST_CASE("OvR normalises per-class sigmoids") {
  OvRLR m{{{1, 0}, {0, 1}, {-1, -1}}, {0, 0.5, -0.2}};
  const Point x{0.3, -0.7};
  auto p = predict_proba(m, x);
  double s[3], total = 0;
  for (int k = 0; k < 3; ++k) total += s[k] = sigmoid(class_scores(m, x)[k]);
  for (int k = 0; k < 3; ++k) CHECK(p[k] == doctest::Approx(s[k] / total));
  // All sigmoids underflowing still yields a distribution.
  OvRLR far{{{-1e4}, {-1e4}}, {0, 0}};
  CHECK(is_prob_vector(predict_proba(far, {1.0})));
}

TEST_CASE("softmax is shift invariant") {
  Rng rng(5);
  SoftmaxLR m{Weights(3, std::vector<double>(4)), std::vector<double>(3)};
  for (auto& r : m.w)
    for (double& v : r) v = rng.normal();
  for (double& b : m.betas) b = rng.normal();
  SoftmaxLR shifted = m;
  for (auto& r : shifted.w)
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += 0.7 * (j + 1);
  for (double& b : shifted.betas) b += 2.5;
  for (int t = 0; t < 100; ++t) {
    Point x(4);
    for (double& v : x) v = rng.uniform(-1, 1);
    auto a = predict_proba(m, x), b = predict_proba(shifted, x);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(a[k] - b[k]) < 1e-12);
  }
}

TEST_CASE("probabilities are valid and consistent with the predicted class") {
  Rng rng(8);
  MLP mlp{Weights(5, std::vector<double>(3)), std::vector<double>(5), Weights(4, std::vector<double>(5)),
          std::vector<double>(4)};
  for (auto* w : {&mlp.w1, &mlp.w2})
    for (auto& r : *w)
      for (double& v : r) v = rng.normal(0, 2);
  for (int t = 0; t < 200; ++t) {
    Point x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    auto p = predict_proba(mlp, x);
    CHECK(is_prob_vector(p));
    CHECK(predict_class(mlp, x) == argmax(p));
  }
}

TEST_CASE("a zero-weight representer changes nothing") {
  KernelLR a{{{0.5, -1.0}, {0.2, 0.3}}, {0.1, -0.1}, {{0.1, 0.1}, {-0.5, 0.4}}, 2.0};
  KernelLR b = a;
  b.alphas[0].push_back(0.0);
  b.alphas[1].push_back(0.0);
  b.representers.push_back({0.9, -0.9});
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    Point x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    CHECK(predict_proba(a, x) == predict_proba(b, x));
  }
}

TEST_CASE("example tree traversal") {
  const ExampleTree ex = size_color_tree();
  CHECK_NOTHROW(ex.tree.validate(ex.space));
  CHECK(ex.tree.leaf_count() == 6);
  PartialQuery q = PartialQuery::complete(Point{50, kRed});
  CHECK(tree_traverse(ex.tree, q) == ex.leaf[2]);
  CHECK(predict_class(ex.tree, {50, kRed}) == ex.tree.nodes[ex.leaf[2]].label);
  CHECK(tree_traverse(ex.tree, PartialQuery::missing(2)) == 0);
  // Color is tested first, so a query without Color halts at the root.
  PartialQuery size_only = PartialQuery::missing(2);
  size_only.set(0, 50);
  CHECK(tree_traverse(ex.tree, size_only) == 0);
  PartialQuery color_only = PartialQuery::missing(2);
  color_only.set(1, kRed);
  CHECK(ex.tree.nodes[tree_traverse(ex.tree, color_only)].feature == 0);
  CHECK(tree_traverse(ex.tree, PartialQuery::complete(Point{10, kYellow})) == ex.leaf[6]);
  CHECK(tree_traverse(ex.tree, PartialQuery::complete(Point{61, kGreen})) == ex.leaf[5]);
  CHECK(tree_traverse(ex.tree, PartialQuery::complete(Point{60, kGreen})) == ex.leaf[4]);
}

TEST_CASE("malformed trees are rejected") {
  ExampleTree ex = size_color_tree();
  ex.tree.nodes[1].children[1] = 42;
  CHECK_THROWS_AS(ex.tree.validate(ex.space), std::invalid_argument);
  CHECK_THROWS_AS(tree_traverse(ex.tree, PartialQuery::complete(Point{50, kRed})), std::invalid_argument);
  ExampleTree orphan = size_color_tree();
  orphan.tree.nodes.emplace_back();
  CHECK_THROWS_AS(orphan.tree.validate(orphan.space), std::invalid_argument);
}

TEST_CASE("complete queries always reach a leaf") {
  const FeatureSpace space = corpus_space();
  Rng rng(4);
  for (int k = 0; k < 5; ++k) {
    TreeGenOptions opt;
    opt.leaves = 20;
    const DecisionTree t = random_tree(space, opt, 100 + k);
    for (int i = 0; i < 200; ++i) {
      const int v = tree_traverse(t, PartialQuery::complete(space.sample(rng)));
      CHECK(t.nodes[v].kind == SplitKind::Leaf);
    }
  }
}

TEST_CASE("polynomial feature map reproduces the kernel") {
  // d = 1, degree 2: phi(a) = [1, sqrt2 a, a^2].
  const double a = 0.7;
  auto phi = poly_feature_map({a}, 2);
  REQUIRE(phi.size() == 3);
  double self = 0;
  for (double v : phi) self += v * v;
  CHECK(self == doctest::Approx((a * a + 1) * (a * a + 1)));
  auto zero = poly_feature_map({0, 0, 0}, 3);
  double z = 0;
  for (double v : zero) z += v * v;
  CHECK(z == doctest::Approx(1.0));
  CHECK(zero[0] == 1.0);
  CHECK(poly_feature_dim(3, 2) == 10);

  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const int deg = 2 + t % 2;
    Point x(3), y(3);
    for (double& v : x) v = rng.uniform(-1, 1);
    for (double& v : y) v = rng.uniform(-1, 1);
    auto px = poly_feature_map(x, deg), py = poly_feature_map(y, deg);
    double ip = 0;
    for (std::size_t i = 0; i < px.size(); ++i) ip += px[i] * py[i];
    CHECK(std::abs(ip - kernel_eval(PolyKernel{deg}, x, y)) < 1e-9);
  }
}

TEST_CASE("model JSON round trip is lossless") {
  Rng rng(12);
  auto r = [&] { return rng.normal() / 3.0; };
  std::vector<ModelSpec> models{
      BinaryLR{{r(), r()}, r()},
      SoftmaxLR{{{r(), r()}, {r(), r()}}, {r(), r()}},
      OvRLR{{{r()}, {r()}, {r()}}, {r(), r(), r()}},
      MLP{{{r(), r()}}, {r()}, {{r()}, {r()}}, {r(), r()}},
      KernelLR{{{r(), r()}, {r(), r()}}, {r(), r()}, {{r(), r()}, {r(), r()}}, 0.5},
      SVM{RbfKernel{1.5}, {}, {0.3, -0.3}, {{r(), r()}, {r(), r()}}, r()},
      size_color_tree().tree,
  };
  for (const auto& m : models) {
    const auto j = model_to_json(m);
    CHECK(j.at("kind").get<std::string>() == kind_name(m));
    const ModelSpec back = model_from_json(nlohmann::json::parse(j.dump()));
    CHECK(model_to_json(back) == j);
    if (supports_proba(m) && !std::holds_alternative<DecisionTree>(m)) {
      const Point x(input_dim(m), 0.3);
      CHECK(predict_proba(back, x) == predict_proba(m, x));
    }
  }
}

TEST_CASE("parameter counts") {
  MLP m{Weights(20, std::vector<double>(105)), std::vector<double>(20), Weights(5, std::vector<double>(20)),
        std::vector<double>(5)};
  CHECK(parameter_count(m) == 2225);
  SoftmaxLR s{Weights(5, std::vector<double>(105)), std::vector<double>(5)};
  CHECK(parameter_count(s) == 530);
}
