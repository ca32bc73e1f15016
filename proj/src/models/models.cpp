#include "mexlab/models/models.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "mexlab/models/poly.hpp"

namespace mexlab {

double rbf(const Point& a, const Point& b, double gamma) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return std::exp(-gamma * s);
}

double kernel_eval(const Kernel& k, const Point& a, const Point& b) {
  if (const auto* r = std::get_if<RbfKernel>(&k)) return rbf(a, b, r->gamma);
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] * b[i];
  if (const auto* p = std::get_if<PolyKernel>(&k)) return std::pow(d + 1.0, p->degree);
  return d;
}

double SVM::decision_value(const Point& x) const {
  if (std::holds_alternative<LinearKernel>(kernel) && !w.empty()) {
    double s = beta;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
    return s;
  }
  double s = beta;
  for (std::size_t i = 0; i < dual_alphas.size(); ++i) {
    s += dual_alphas[i] * kernel_eval(kernel, x, support_vectors[i]);
  }
  return s;
}

int DecisionTree::child_for(int node, double value) const {
  const TreeNode& n = nodes.at(node);
  int slot = 0;
  switch (n.kind) {
    case SplitKind::Leaf:
      throw std::logic_error("child_for on a leaf");
    case SplitKind::Threshold:
      slot = value <= n.threshold ? 0 : 1;
      break;
    case SplitKind::CategoricalBinary:
      slot = std::find(n.left_set.begin(), n.left_set.end(), static_cast<int>(value)) !=
                     n.left_set.end()
                 ? 0
                 : 1;
      break;
    case SplitKind::CategoricalMulti:
      slot = static_cast<int>(value);
      break;
  }
  if (slot < 0 || slot >= static_cast<int>(n.children.size())) {
    throw std::invalid_argument("malformed tree: no child for value at node " +
                                std::to_string(node));
  }
  const int child = n.children[slot];
  if (child < 0 || child >= static_cast<int>(nodes.size())) {
    throw std::invalid_argument("malformed tree: dangling child at node " + std::to_string(node));
  }
  return child;
}

int DecisionTree::depth() const {
  std::function<int(int)> rec = [&](int v) {
    int best = 0;
    for (int c : nodes[v].children) best = std::max(best, 1 + rec(c));
    return best;
  };
  return nodes.empty() ? 0 : rec(0);
}

int DecisionTree::leaf_count() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) {
    return n.kind == SplitKind::Leaf;
  }));
}

void DecisionTree::validate(const FeatureSpace& space) const {
  if (nodes.empty()) throw std::invalid_argument("tree has no nodes");
  std::vector<int> parents(nodes.size(), 0);
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    const TreeNode& n = nodes[v];
    const auto where = " at node " + std::to_string(v);
    if (n.kind == SplitKind::Leaf) {
      if (!n.children.empty()) throw std::invalid_argument("leaf with children" + where);
      continue;
    }
    if (n.feature < 0 || n.feature >= static_cast<int>(space.size())) {
      throw std::invalid_argument("split feature out of range" + where);
    }
    std::size_t want = 2;
    if (n.kind == SplitKind::Threshold) {
      if (!space.is_continuous(n.feature)) {
        throw std::invalid_argument("threshold split on categorical feature" + where);
      }
      if (!(space.lo(n.feature) < n.threshold && n.threshold < space.hi(n.feature))) {
        throw std::invalid_argument("threshold outside the open feature range" + where);
      }
    } else {
      if (space.is_continuous(n.feature)) {
        throw std::invalid_argument("categorical split on continuous feature" + where);
      }
      if (n.kind == SplitKind::CategoricalMulti) want = space.arity(n.feature);
      if (n.kind == SplitKind::CategoricalBinary &&
          (n.left_set.empty() ||
           n.left_set.size() >= static_cast<std::size_t>(space.arity(n.feature)))) {
        throw std::invalid_argument("binary categorical split is not a proper partition" + where);
      }
    }
    if (n.children.size() != want) throw std::invalid_argument("wrong child count" + where);
    for (int c : n.children) {
      if (c <= 0 || c >= static_cast<int>(nodes.size())) {
        throw std::invalid_argument("dangling child" + where);
      }
      ++parents[c];
    }
  }
  for (std::size_t v = 1; v < nodes.size(); ++v) {
    if (parents[v] != 1) {
      throw std::invalid_argument("node " + std::to_string(v) + " is unreachable or shared");
    }
  }
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string kind_name(const ModelSpec& m) {
  return std::visit(overloaded{
                        [](const BinaryLR&) { return std::string("binary_lr"); },
                        [](const SoftmaxLR&) { return std::string("softmax"); },
                        [](const OvRLR&) { return std::string("ovr"); },
                        [](const MLP&) { return std::string("mlp"); },
                        [](const KernelLR&) { return std::string("kernel_lr"); },
                        [](const SVM&) { return std::string("svm"); },
                        [](const DecisionTree&) { return std::string("tree"); },
                    },
                    m);
}

int num_classes(const ModelSpec& m) {
  return std::visit(overloaded{
                        [](const BinaryLR&) { return 2; },
                        [](const SoftmaxLR& s) { return static_cast<int>(s.betas.size()); },
                        [](const OvRLR& s) { return static_cast<int>(s.betas.size()); },
                        [](const MLP& s) { return static_cast<int>(s.b2.size()); },
                        [](const KernelLR& s) { return static_cast<int>(s.betas.size()); },
                        [](const SVM&) { return 2; },
                        [](const DecisionTree& t) { return t.classes; },
                    },
                    m);
}

std::size_t input_dim(const ModelSpec& m) {
  return std::visit(
      overloaded{
          [](const BinaryLR& s) { return s.w.size(); },
          [](const SoftmaxLR& s) { return s.w.empty() ? std::size_t{0} : s.w[0].size(); },
          [](const OvRLR& s) { return s.w.empty() ? std::size_t{0} : s.w[0].size(); },
          [](const MLP& s) { return s.w1.empty() ? std::size_t{0} : s.w1[0].size(); },
          [](const KernelLR& s) {
            return s.representers.empty() ? std::size_t{0} : s.representers[0].size();
          },
          [](const SVM& s) {
            if (!s.w.empty()) return s.w.size();
            return s.support_vectors.empty() ? std::size_t{0} : s.support_vectors[0].size();
          },
          [](const DecisionTree&) { return std::size_t{0}; },
      },
      m);
}

std::size_t parameter_count(const ModelSpec& m) {
  return std::visit(
      overloaded{
          [](const BinaryLR& s) { return s.w.size() + 1; },
          [](const SoftmaxLR& s) {
            return s.betas.size() * ((s.w.empty() ? 0 : s.w[0].size()) + 1);
          },
          [](const OvRLR& s) { return s.betas.size() * ((s.w.empty() ? 0 : s.w[0].size()) + 1); },
          [](const MLP& s) {
            const std::size_t d = s.w1.empty() ? 0 : s.w1[0].size();
            const std::size_t h = s.b1.size();
            const std::size_t c = s.b2.size();
            return d * h + h * c + h + c;
          },
          [](const KernelLR& s) {
            const std::size_t d = s.representers.empty() ? 0 : s.representers[0].size();
            const std::size_t c = s.betas.size();
            return c * s.representers.size() + c + s.representers.size() * d;
          },
          // Label-only budgets for SVMs are expressed against d + 1.
          [](const SVM& s) {
            const std::size_t d =
                !s.w.empty() ? s.w.size()
                             : (s.support_vectors.empty() ? 0 : s.support_vectors[0].size());
            return d + 1;
          },
          [](const DecisionTree& t) { return t.nodes.size(); },
      },
      m);
}

}  // namespace mexlab
