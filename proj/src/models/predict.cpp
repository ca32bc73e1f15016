#include "mexlab/models/predict.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mexlab {

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double logit(double p, double clip) {
  p = std::clamp(p, clip, 1.0 - clip);
  return std::log(p) - std::log1p(-p);
}

ProbVector softmax(const std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  ProbVector p(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - m);
    s += p[i];
  }
  for (double& v : p) v /= s;
  return p;
}

namespace {

std::vector<double> linear_scores(const Weights& w, const std::vector<double>& b, const Point& x) {
  std::vector<double> z(b);
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) z[i] += w[i][j] * x[j];
  }
  return z;
}

ProbVector tree_proba(const DecisionTree& t, const TreeNode& n) {
  if (!n.distribution.empty()) return n.distribution;
  ProbVector p(t.classes, 0.0);
  if (t.classes == 1) {
    p[0] = 1.0;
    return p;
  }
  const double rest = (1.0 - n.confidence) / (t.classes - 1);
  std::fill(p.begin(), p.end(), rest);
  p[n.label] = n.confidence;
  return p;
}

}  // namespace

std::vector<double> class_scores(const ModelSpec& m, const Point& x) {
  if (const auto* lr = std::get_if<BinaryLR>(&m)) {
    double z = lr->beta;
    for (std::size_t j = 0; j < x.size(); ++j) z += lr->w[j] * x[j];
    return {z};
  }
  if (const auto* s = std::get_if<SoftmaxLR>(&m)) return linear_scores(s->w, s->betas, x);
  if (const auto* s = std::get_if<OvRLR>(&m)) return linear_scores(s->w, s->betas, x);
  if (const auto* n = std::get_if<MLP>(&m)) {
    std::vector<double> h = linear_scores(n->w1, n->b1, x);
    for (double& v : h) v = std::tanh(v);
    return linear_scores(n->w2, n->b2, h);
  }
  if (const auto* k = std::get_if<KernelLR>(&m)) {
    std::vector<double> kv(k->representers.size());
    for (std::size_t r = 0; r < kv.size(); ++r) kv[r] = rbf(x, k->representers[r], k->gamma);
    return linear_scores(k->alphas, k->betas, kv);
  }
  if (const auto* s = std::get_if<SVM>(&m)) return {s->decision_value(x)};
  throw std::invalid_argument("class_scores: decision trees have no scores");
}

bool supports_proba(const ModelSpec& m) { return !std::holds_alternative<SVM>(m); }

ProbVector predict_proba(const ModelSpec& m, const Point& x) {
  if (std::holds_alternative<SVM>(m)) {
    throw std::invalid_argument("SVM targets do not provide class probabilities");
  }
  if (const auto* t = std::get_if<DecisionTree>(&m)) {
    return tree_proba(*t, t->nodes[tree_traverse(*t, PartialQuery::complete(x))]);
  }
  if (std::holds_alternative<BinaryLR>(m)) {
    const double p1 = sigmoid(class_scores(m, x)[0]);
    return {1.0 - p1, p1};
  }
  std::vector<double> z = class_scores(m, x);
  if (std::holds_alternative<OvRLR>(m)) {
    ProbVector p(z.size());
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      p[i] = std::max(sigmoid(z[i]), 1e-300);
      s += p[i];
    }
    for (double& v : p) v /= s;
    return p;
  }
  return softmax(z);
}

int predict_class(const ModelSpec& m, const Point& x) {
  if (const auto* s = std::get_if<SVM>(&m)) return s->decision_value(x) >= 0.0 ? 1 : 0;
  if (const auto* t = std::get_if<DecisionTree>(&m)) {
    return t->nodes[tree_traverse(*t, PartialQuery::complete(x))].label;
  }
  if (std::holds_alternative<BinaryLR>(m)) {
    // Class 1 iff f_1(x) > 0.5, i.e. a strictly positive score.
    return class_scores(m, x)[0] > 0.0 ? 1 : 0;
  }
  return argmax(predict_proba(m, x));
}

int tree_traverse(const DecisionTree& t, const PartialQuery& x) {
  if (t.nodes.empty()) throw std::invalid_argument("malformed tree: no nodes");
  int v = 0;
  std::size_t steps = 0;
  while (t.nodes[v].kind != SplitKind::Leaf) {
    const auto f = static_cast<std::size_t>(t.nodes[v].feature);
    if (f >= x.size()) throw std::invalid_argument("malformed tree: feature index out of range");
    if (x.is_missing(f)) return v;
    v = t.child_for(v, *x[f]);
    if (++steps > t.nodes.size()) throw std::invalid_argument("malformed tree: cycle");
  }
  return v;
}

ProbVector node_distribution(const DecisionTree& t, int node) {
  return tree_proba(t, t.nodes.at(node));
}

Predictor as_predictor(const ModelSpec& m) {
  Predictor p;
  p.label = [m](const Point& x) { return predict_class(m, x); };
  if (supports_proba(m)) p.proba = [m](const Point& x) { return predict_proba(m, x); };
  return p;
}

}  // namespace mexlab
