#include "mexlab/harness/tree_corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mexlab/attacks/line_search.hpp"
#include "mexlab/core/rng.hpp"

namespace mexlab {

ExampleTree size_color_tree() {
  ExampleTree ex;
  ex.space = FeatureSpace({Continuous{0, 100}, Categorical{5}});
  auto& n = ex.tree.nodes;
  n.resize(11);
  auto split = [&](int v, SplitKind k, int f, double t, std::vector<int> left, int a, int b) {
    n[v].kind = k;
    n[v].feature = f;
    n[v].threshold = t;
    n[v].left_set = std::move(left);
    n[v].children = {a, b};
  };
  // Color in {R,B,G} -> Size <= 40 -> id1 | Size <= 60 -> Color -> id2/id3/id4 | id5;
  // Color in {Y,O} -> id6. The three-way Color node is two binary partitions.
  split(0, SplitKind::CategoricalBinary, 1, 0, {kRed, kBlue, kGreen}, 1, 10);
  split(1, SplitKind::Threshold, 0, 40, {}, 2, 3);
  split(3, SplitKind::Threshold, 0, 60, {}, 4, 9);
  split(4, SplitKind::CategoricalBinary, 1, 0, {kRed}, 5, 6);
  split(6, SplitKind::CategoricalBinary, 1, 0, {kBlue}, 7, 8);
  const int leaves[7] = {0, 2, 5, 7, 8, 9, 10};
  const double conf[11] = {0.55, 0.58, 0.91, 0.62, 0.66, 0.83, 0.69, 0.77, 0.72, 0.88, 0.95};
  const int label[11] = {0, 0, 0, 1, 1, 1, 1, 0, 1, 1, 0};
  for (int v = 0; v < 11; ++v) {
    n[v].label = label[v];
    n[v].confidence = conf[v];
  }
  std::copy(std::begin(leaves), std::end(leaves), ex.leaf);
  ex.tree.classes = 2;
  return ex;
}

namespace {

struct Region {
  std::vector<double> lo, hi;
  std::vector<std::vector<int>> values;
};

class Generator {
 public:
  Generator(const FeatureSpace& space, const TreeGenOptions& opt, std::uint64_t seed)
      : space_(space), opt_(opt), rng_(seed) {}

  DecisionTree run() {
    if (opt_.leaves < 1) throw std::invalid_argument("a tree needs at least one leaf");
    Region root;
    for (std::size_t i = 0; i < space_.size(); ++i) {
      root.lo.push_back(space_.is_continuous(i) ? space_.lo(i) : 0);
      root.hi.push_back(space_.is_continuous(i) ? space_.hi(i) : 0);
      std::vector<int> vals;
      if (!space_.is_continuous(i)) {
        vals.resize(space_.arity(i));
        std::iota(vals.begin(), vals.end(), 0);
      }
      root.values.push_back(std::move(vals));
    }
    add_node(root, 0);
    int leaves = 1;
    if (opt_.depth > 0) {
      for (int level = 0; level < opt_.depth; ++level) {
        int deepest = -1;
        for (int v = 0; v < static_cast<int>(nodes_.size()); ++v) {
          if (is_leaf(v) && depth_[v] == level && splittable(v)) deepest = v;
        }
        if (deepest < 0) throw std::runtime_error("cannot reach the requested depth");
        leaves += split(deepest, opt_.leaves - leaves) - 1;
      }
    }
    int stuck = 0;
    while (leaves < opt_.leaves) {
      std::vector<int> cands;
      for (int v = 0; v < static_cast<int>(nodes_.size()); ++v) {
        if (is_leaf(v) && splittable(v) && (opt_.depth < 0 || depth_[v] < opt_.depth)) cands.push_back(v);
      }
      if (cands.empty() || ++stuck > 10000) throw std::runtime_error("cannot grow the tree further");
      leaves += split(cands[rng_.below(cands.size())], opt_.leaves - leaves) - 1;
    }
    assign_ids();
    DecisionTree t;
    t.nodes = std::move(nodes_);
    t.classes = opt_.classes;
    return t;
  }

 private:
  bool is_leaf(int v) const { return nodes_[v].kind == SplitKind::Leaf; }

  int add_node(Region r, int depth) {
    nodes_.emplace_back();
    regions_.push_back(std::move(r));
    depth_.push_back(depth);
    return static_cast<int>(nodes_.size() - 1);
  }

  // Grid index range that leaves at least two cells on each side.
  std::pair<long long, long long> cut_range(const Region& r, std::size_t i) const {
    const long long a = static_cast<long long>(std::ceil(r.lo[i] / opt_.eps)) + 2;
    const long long b = static_cast<long long>(std::floor(r.hi[i] / opt_.eps)) - 2;
    return {a, b};
  }

  bool feature_splittable(const Region& r, std::size_t i) const {
    if (space_.is_continuous(i)) {
      auto [a, b] = cut_range(r, i);
      return a <= b;
    }
    return r.values[i].size() >= 2;
  }

  bool splittable(int v) const {
    for (std::size_t i = 0; i < space_.size(); ++i) {
      if (feature_splittable(regions_[v], i)) return true;
    }
    return false;
  }

  // Returns the number of children created.
  int split(int v, int room) {
    std::vector<std::size_t> feats;
    for (std::size_t i = 0; i < space_.size(); ++i) {
      if (feature_splittable(regions_[v], i)) feats.push_back(i);
    }
    const std::size_t f = feats[rng_.below(feats.size())];
    const Region r = regions_[v];
    const int depth = depth_[v] + 1;
    std::vector<int> kids;
    SplitKind kind;
    double threshold = 0.0;
    std::vector<int> left_set;
    if (space_.is_continuous(f)) {
      auto [a, b] = cut_range(r, f);
      const long long k = a + static_cast<long long>(rng_.below(static_cast<std::uint64_t>(b - a + 1)));
      threshold = grid_value(k, opt_.eps);
      Region left = r, right = r;
      left.hi[f] = threshold;
      right.lo[f] = threshold;
      kind = SplitKind::Threshold;
      kids = {add_node(left, depth), add_node(right, depth)};
    } else {
      const auto& vals = r.values[f];
      const int arity = space_.arity(f);
      const bool multi = static_cast<int>(vals.size()) == arity && arity - 1 <= room - 1 &&
                         arity <= 4 && rng_.uniform() < 0.3;
      if (multi) {
        kind = SplitKind::CategoricalMulti;
        for (int c = 0; c < arity; ++c) {
          Region child = r;
          child.values[f] = {c};
          kids.push_back(add_node(child, depth));
        }
      } else {
        kind = SplitKind::CategoricalBinary;
        std::vector<int> shuffled = vals;
        shuffle(shuffled, rng_);
        const std::size_t take = 1 + rng_.below(shuffled.size() - 1);
        left_set.assign(shuffled.begin(), shuffled.begin() + take);
        std::sort(left_set.begin(), left_set.end());
        std::vector<int> rest(shuffled.begin() + take, shuffled.end());
        std::sort(rest.begin(), rest.end());
        Region left = r, right = r;
        left.values[f] = left_set;
        right.values[f] = rest;
        kids = {add_node(left, depth), add_node(right, depth)};
      }
    }
    TreeNode& n = nodes_[v];
    n.kind = kind;
    n.feature = static_cast<int>(f);
    n.threshold = threshold;
    n.left_set = std::move(left_set);
    n.children = std::move(kids);
    return static_cast<int>(n.children.size());
  }

  void assign_ids() {
    const std::size_t n = nodes_.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(perm, rng_);
    for (std::size_t v = 0; v < n; ++v) {
      nodes_[v].label = rng_.integer(opt_.classes);
      nodes_[v].confidence = 0.5 + 0.45 * static_cast<double>(perm[v] + 1) / static_cast<double>(n + 1);
    }
    std::vector<int> leaves;
    for (std::size_t v = 0; v < n; ++v) {
      if (nodes_[v].kind == SplitKind::Leaf) leaves.push_back(static_cast<int>(v));
    }
    for (int k = 0; k < opt_.duplicate_leaf_ids && leaves.size() >= 2; ++k) {
      shuffle(leaves, rng_);
      nodes_[leaves[0]].label = nodes_[leaves[1]].label;
      nodes_[leaves[0]].confidence = nodes_[leaves[1]].confidence;
      leaves.erase(leaves.begin(), leaves.begin() + 2);
    }
  }

  const FeatureSpace& space_;
  TreeGenOptions opt_;
  Rng rng_;
  std::vector<TreeNode> nodes_;
  std::vector<Region> regions_;
  std::vector<int> depth_;
};

}  // namespace

DecisionTree random_tree(const FeatureSpace& space, const TreeGenOptions& opt, std::uint64_t seed) {
  DecisionTree t = Generator(space, opt, seed).run();
  t.validate(space);
  return t;
}

FeatureSpace corpus_space() {
  return FeatureSpace({Continuous{-1, 1}, Continuous{-1, 1}, Categorical{3}, Categorical{4}});
}

std::vector<CorpusTree> tree_corpus(int count, int max_leaves, std::uint64_t seed, double eps) {
  Rng rng(seed);
  std::vector<CorpusTree> out;
  const FeatureSpace space = corpus_space();
  for (int k = 0; k < count; ++k) {
    TreeGenOptions opt;
    opt.leaves = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_leaves - 1)));
    opt.eps = eps;
    out.push_back({space, random_tree(space, opt, rng.fork())});
  }
  return out;
}

CorpusTree credit_shaped_tree(std::uint64_t seed) {
  FeatureSpace space({Continuous{4, 72}, Continuous{250, 18424}, Continuous{19, 75},
                      Continuous{1, 4}, Categorical{4}, Categorical{5}, Categorical{10},
                      Categorical{5}, Categorical{5}, Categorical{3}, Categorical{4}});
  TreeGenOptions opt;
  opt.leaves = 26;
  opt.depth = 11;
  opt.duplicate_leaf_ids = 1;
  return {space, random_tree(space, opt, seed)};
}

double path_find_bound(const FeatureSpace& space, int leaves, double eps) {
  int d_cat = 0, d_cont = 0, k = 0;
  double b = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (space.is_continuous(i)) {
      ++d_cont;
      b = std::max(b, space.hi(i) - space.lo(i));
    } else {
      ++d_cat;
      k = std::max(k, space.arity(i));
    }
  }
  const double m = leaves;
  const double logterm = d_cont > 0 ? std::log2(b / eps) : 0.0;
  return m * (d_cat * k + d_cont * m * logterm);
}

}  // namespace mexlab
