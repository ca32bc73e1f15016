#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "mexlab/core/rng.hpp"
#include "mexlab/models/predict.hpp"
#include "mexlab/training/logistic.hpp"
#include "mexlab/training/svm.hpp"
#include "mexlab/training/tree.hpp"

using namespace mexlab;

namespace {

// Two Gaussian-ish blobs in [-1,1]^2, labelled by the sign of x0 + x1.
Dataset linear_blobs(int n, int classes, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d{FeatureSpace::box(2), classes, {}, {}, {}};
  for (int i = 0; i < n; ++i) {
    Point x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    int y = 0;
    if (classes == 2) {
      y = x[0] + x[1] > 0 ? 1 : 0;
    } else {
      y = static_cast<int>((std::atan2(x[1], x[0]) + M_PI) / (2 * M_PI) * classes) % classes;
    }
    d.rows.push_back({x, y});
  }
  d.split(0.7, seed);
  return d;
}

double accuracy(const ModelSpec& m, const std::vector<LabeledPoint>& rows) {
  int ok = 0;
  for (const auto& r : rows) ok += predict_class(m, r.x) == r.y;
  return static_cast<double>(ok) / rows.size();
}

std::vector<double> numeric_gradient(const ModelSpec& m, const std::vector<Target>& t,
                                     double lambda) {
  std::vector<double> flat = flatten(m), g(flat.size());
  const double h = 1e-6;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    auto up = flat, dn = flat;
    up[i] += h;
    dn[i] -= h;
    g[i] = (cross_entropy_loss(unflatten(m, up), t, lambda) -
            cross_entropy_loss(unflatten(m, dn), t, lambda)) /
           (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(17);
  std::vector<Target> targets;
  for (int i = 0; i < 12; ++i) {
    Point x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    ProbVector t{rng.uniform(), rng.uniform(), rng.uniform()};
    const double s = t[0] + t[1] + t[2];
    for (double& v : t) v /= s;
    targets.push_back({x, t});
  }
  std::vector<Target> binary;
  for (const auto& t : targets) binary.push_back({t.x, {t.t[0] + t.t[1], t.t[2]}});

  FamilyOptions opt;
  opt.hidden = 4;
  opt.init_scale = 0.5;
  for (FamilyKind kind :
       {FamilyKind::BinaryLR, FamilyKind::Softmax, FamilyKind::OvR, FamilyKind::MLP, FamilyKind::KernelLR}) {
    CAPTURE(std::string(family_name(kind)));
    const int classes = kind == FamilyKind::BinaryLR ? 2 : 3;
    ModelSpec m = initial_model(kind, 3, classes, opt, 5);
    if (auto* k = std::get_if<KernelLR>(&m)) {
      for (auto& row : k->alphas) row.clear();
      for (int s = 0; s < 3; ++s) {
        k->representers.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
        for (auto& row : k->alphas) row.push_back(rng.normal());
      }
    }
    const auto& t = kind == FamilyKind::BinaryLR ? binary : targets;
    std::vector<double> g;
    loss_and_gradient(m, t, 0.01, &g);
    const auto num = numeric_gradient(m, t, 0.01);
    REQUIRE(g.size() == num.size());
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(g[i] - num[i]) < 1e-6);
  }
}

TEST_CASE("flatten and unflatten are inverse") {
  FamilyOptions opt;
  opt.hidden = 3;
  ModelSpec m = initial_model(FamilyKind::MLP, 4, 3, opt, 1);
  CHECK(flatten(unflatten(m, flatten(m))) == flatten(m));
  CHECK(flatten(m).size() == parameter_count(m));
}

TEST_CASE("logistic targets reach high training accuracy") {
  OptimizerConfig cfg;
  const Dataset bin = linear_blobs(400, 2, 3);
  auto lr = fit_logistic_family(FamilyKind::BinaryLR, bin, cfg);
  CHECK(accuracy(lr.model, bin.test_rows()) >= 0.95);

  const Dataset multi = linear_blobs(600, 3, 4);
  for (FamilyKind kind : {FamilyKind::Softmax, FamilyKind::OvR, FamilyKind::MLP}) {
    CAPTURE(std::string(family_name(kind)));
    auto fit = fit_logistic_family(kind, multi, cfg);
    CHECK(accuracy(fit.model, multi.train_rows()) >= 0.9);
  }
}

TEST_CASE("training rejects degenerate data") {
  Dataset d{FeatureSpace::box(2), 2, {}, {}, {}};
  for (int i = 0; i < 10; ++i) d.rows.push_back({{0.1 * i - 0.5, 0}, 0});
  d.split(0.5, 1);
  CHECK_THROWS_AS(fit_logistic_family(FamilyKind::BinaryLR, d, OptimizerConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(fit_svm(LinearKernel{}, d, OptimizerConfig{}), std::invalid_argument);
  Dataset three = linear_blobs(60, 3, 2);
  CHECK_THROWS_AS(fit_logistic_family(FamilyKind::BinaryLR, three, OptimizerConfig{}), std::invalid_argument);
}

TEST_CASE("optimiser stops on a tiny gradient") {
  // f(x) = sum (x_i - i)^2.
  Objective quad = [](const std::vector<double>& x, std::vector<double>* g, const std::vector<std::size_t>*) {
    double f = 0;
    if (g) g->assign(x.size(), 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      f += (x[i] - i) * (x[i] - i);
      if (g) (*g)[i] = 2 * (x[i] - i);
    }
    return f;
  };
  for (Solver s : {Solver::GradientDescent, Solver::LBFGS}) {
    std::vector<double> x(5, 0.0);
    OptimizerConfig cfg;
    cfg.solver = s;
    cfg.learning_rate = 0.1;
    auto rep = minimize(quad, x, cfg);
    CHECK(rep.converged);
    for (std::size_t i = 0; i < 5; ++i) CHECK(x[i] == doctest::Approx(i).epsilon(1e-6));
  }
  OptimizerConfig bad;
  bad.momentum = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("SVM duals respect the box constraint") {
  const Dataset d = linear_blobs(120, 2, 9);
  OptimizerConfig cfg;
  cfg.l2_lambda = 1e-2;
  SvmFitInfo info;
  const SVM svm = fit_svm(RbfKernel{2.0}, d, cfg, &info);
  const double c = 1.0 / (2.0 * d.train.size() * cfg.l2_lambda);
  CHECK(info.box_c == doctest::Approx(c));
  double balance = 0;
  for (std::size_t i = 0; i < info.alphas.size(); ++i) {
    CHECK(info.alphas[i] >= 0.0);
    CHECK(info.alphas[i] <= c + 1e-12);
    balance += info.alphas[i] * info.signs[i];
  }
  CHECK(std::abs(balance) < 1e-8);
  CHECK(accuracy(svm, d.train_rows()) >= 0.9);

  SvmFitInfo pinfo;
  const SVM poly = fit_svm(PolyKernel{2}, d, cfg, &pinfo);
  CHECK(accuracy(poly, d.train_rows()) >= 0.9);
  const SVM lin = fit_svm(LinearKernel{}, d, cfg);
  CHECK(lin.w.size() == 2);
  CHECK(accuracy(lin, d.train_rows()) >= 0.9);
  CHECK_THROWS_AS(fit_svm(PolyKernel{1}, d, cfg), std::invalid_argument);
}

TEST_CASE("Wilson lower bound") {
  CHECK(wilson_lower_bound(0, 10) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(wilson_lower_bound(10, 10) == doctest::Approx(0.7225).epsilon(1e-3));
  CHECK(wilson_lower_bound(50, 100) == doctest::Approx(0.4038).epsilon(1e-3));
  CHECK(wilson_lower_bound(90, 100) < 0.9);
  CHECK(wilson_lower_bound(900, 1000) > wilson_lower_bound(90, 100));
}

TEST_CASE("tree induction") {
  FeatureSpace s({Continuous{0, 1}, Categorical{3}});
  Rng rng(6);
  Dataset d{s, 2, {}, {}, {}};
  for (int i = 0; i < 300; ++i) {
    Point x = s.sample(rng);
    d.rows.push_back({x, (x[0] > 0.3) != (x[1] == 2) ? 1 : 0});
  }
  d.split(0.8, 6);
  const DecisionTree t = fit_tree(d, TreeConfig{});
  CHECK_NOTHROW(t.validate(s));
  CHECK(accuracy(t, d.train_rows()) == 1.0);
  CHECK(accuracy(t, d.test_rows()) >= 0.95);
  for (const auto& n : t.nodes) {
    CHECK(n.confidence >= 0.0);
    CHECK(n.confidence <= 1.0);
  }
  TreeConfig shallow;
  shallow.max_depth = 1;
  CHECK(fit_tree(d, shallow).depth() <= 1);
}
