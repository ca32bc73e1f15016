#include "mexlab/training/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mexlab {

double wilson_lower_bound(double successes, double n, double z) {
  if (n <= 0) return 0.0;
  const double p = successes / n;
  const double z2 = z * z;
  const double centre = p + z2 / (2 * n);
  const double spread = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  return (centre - spread) / (1 + z2 / n);
}

namespace {

struct Counts {
  std::vector<double> c;
  double total = 0;

  explicit Counts(int classes) : c(classes, 0.0) {}
  void add(int y, double w = 1.0) {
    c[y] += w;
    total += w;
  }
  double gini() const {
    if (total <= 0) return 0.0;
    double s = 1.0;
    for (double v : c) s -= (v / total) * (v / total);
    return s;
  }
};

struct Split {
  double score = 0.0;  // weighted child impurity
  SplitKind kind = SplitKind::Leaf;
  int feature = -1;
  double threshold = 0.0;
  std::vector<int> left_set;
};

class Builder {
 public:
  Builder(const FeatureSpace& space, int classes, const std::vector<LabeledPoint>& rows,
          const TreeConfig& cfg)
      : space_(space), classes_(classes), rows_(rows), cfg_(cfg) {
    tree_.classes = classes;
  }

  DecisionTree run() {
    std::vector<std::size_t> idx(rows_.size());
    std::iota(idx.begin(), idx.end(), 0);
    grow(idx, 0, Counts(classes_));
    return std::move(tree_);
  }

 private:
  Counts count(const std::vector<std::size_t>& idx) const {
    Counts c(classes_);
    for (std::size_t i : idx) c.add(rows_[i].y);
    return c;
  }

  void label_node(TreeNode& node, const Counts& c) const {
    const int lab = static_cast<int>(std::max_element(c.c.begin(), c.c.end()) - c.c.begin());
    node.label = lab;
    node.confidence = wilson_lower_bound(c.c[lab], c.total);
  }

  int grow(const std::vector<std::size_t>& idx, int depth, const Counts& parent) {
    const int v = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    // Empty regions inherit the parent's output.
    const Counts here = idx.empty() ? parent : count(idx);
    label_node(tree_.nodes[v], here);
    if (idx.empty() || depth >= cfg_.max_depth || here.gini() <= 0.0 ||
        static_cast<int>(idx.size()) < 2 * cfg_.min_leaf) {
      return v;
    }
    Split best;
    best.score = here.gini() * here.total - 1e-12;
    for (std::size_t f = 0; f < space_.size(); ++f) {
      if (space_.is_continuous(f)) best_threshold(idx, f, best);
      else best_categorical(idx, f, best);
    }
    if (best.kind == SplitKind::Leaf) return v;

    std::vector<std::vector<std::size_t>> parts;
    if (best.kind == SplitKind::CategoricalMulti) parts.resize(space_.arity(best.feature));
    else parts.resize(2);
    for (std::size_t i : idx) {
      const double x = rows_[i].x[best.feature];
      std::size_t slot = 0;
      if (best.kind == SplitKind::Threshold) slot = x <= best.threshold ? 0 : 1;
      else if (best.kind == SplitKind::CategoricalMulti) slot = static_cast<std::size_t>(x);
      else slot = std::count(best.left_set.begin(), best.left_set.end(), static_cast<int>(x)) ? 0 : 1;
      parts[slot].push_back(i);
    }
    std::vector<int> kids;
    for (const auto& p : parts) kids.push_back(grow(p, depth + 1, here));
    TreeNode& node = tree_.nodes[v];
    node.kind = best.kind;
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left_set = best.left_set;
    node.children = std::move(kids);
    return v;
  }

  void best_threshold(const std::vector<std::size_t>& idx, std::size_t f, Split& best) const {
    std::vector<std::size_t> order(idx);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return rows_[a].x[f] < rows_[b].x[f]; });
    Counts left(classes_), right = count(idx);
    const auto n = static_cast<int>(order.size());
    for (int k = 0; k + 1 < n; ++k) {
      const int y = rows_[order[k]].y;
      left.add(y);
      right.add(y, -1.0);
      const double a = rows_[order[k]].x[f], b = rows_[order[k + 1]].x[f];
      if (a == b || k + 1 < cfg_.min_leaf || n - k - 1 < cfg_.min_leaf) continue;
      const double score = left.gini() * left.total + right.gini() * right.total;
      if (score < best.score) {
        const double t = 0.5 * (a + b);
        if (!(space_.lo(f) < t && t < space_.hi(f))) continue;
        best = Split{score, SplitKind::Threshold, static_cast<int>(f), t, {}};
      }
    }
  }

  void best_categorical(const std::vector<std::size_t>& idx, std::size_t f, Split& best) const {
    const int k = space_.arity(f);
    std::vector<Counts> per(k, Counts(classes_));
    for (std::size_t i : idx) per[static_cast<int>(rows_[i].x[f])].add(rows_[i].y);
    int nonempty = 0;
    for (const auto& c : per) nonempty += c.total > 0;
    if (nonempty < 2) return;

    // k-ary split
    if (k > 2) {
      double score = 0.0;
      bool ok = true;
      for (const auto& c : per) {
        score += c.gini() * c.total;
        if (c.total > 0 && c.total < cfg_.min_leaf) ok = false;
      }
      if (ok && score < best.score) best = Split{score, SplitKind::CategoricalMulti, static_cast<int>(f), 0.0, {}};
    }

    // Binary partitions along categories ordered by the overall majority
    // class's share (exact for two classes).
    const Counts all = count(idx);
    const int maj = static_cast<int>(std::max_element(all.c.begin(), all.c.end()) - all.c.begin());
    std::vector<int> cats(k);
    std::iota(cats.begin(), cats.end(), 0);
    auto share = [&](int c) { return per[c].total > 0 ? per[c].c[maj] / per[c].total : -1.0; };
    std::stable_sort(cats.begin(), cats.end(), [&](int a, int b) { return share(a) > share(b); });
    Counts left(classes_), right = all;
    for (int cut = 0; cut + 1 < k; ++cut) {
      const auto& c = per[cats[cut]];
      for (int y = 0; y < classes_; ++y) {
        left.c[y] += c.c[y];
        right.c[y] -= c.c[y];
      }
      left.total += c.total;
      right.total -= c.total;
      if (left.total < std::max(1, cfg_.min_leaf) || right.total < std::max(1, cfg_.min_leaf)) continue;
      const double score = left.gini() * left.total + right.gini() * right.total;
      if (score < best.score) {
        std::vector<int> ls(cats.begin(), cats.begin() + cut + 1);
        std::sort(ls.begin(), ls.end());
        best = Split{score, SplitKind::CategoricalBinary, static_cast<int>(f), 0.0, std::move(ls)};
      }
    }
  }

  const FeatureSpace& space_;
  int classes_;
  const std::vector<LabeledPoint>& rows_;
  TreeConfig cfg_;
  DecisionTree tree_;
};

}  // namespace

DecisionTree fit_tree_rows(const FeatureSpace& space, int classes,
                           const std::vector<LabeledPoint>& rows, const TreeConfig& cfg) {
  if (rows.empty()) throw std::invalid_argument("fit_tree: no training rows");
  if (cfg.max_depth < 0) throw std::invalid_argument("fit_tree: negative max_depth");
  for (const auto& r : rows) {
    if (r.y < 0 || r.y >= classes) throw std::out_of_range("class index out of range");
  }
  return Builder(space, classes, rows, cfg).run();
}

DecisionTree fit_tree(const Dataset& data, const TreeConfig& cfg) {
  return fit_tree_rows(data.space, data.classes, data.train_rows(), cfg);
}

}  // namespace mexlab
