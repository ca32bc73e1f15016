#include "mexlab/attacks/tree_extract.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

#include "mexlab/core/rng.hpp"

namespace mexlab {

using nlohmann::json;

Constraint Constraint::full(const FeatureSpace& space, std::size_t i) {
  Constraint c;
  if (space.is_continuous(i)) {
    c.lo = space.lo(i);
    c.hi = space.hi(i);
  } else {
    c.continuous = false;
    for (int v = 0; v < space.arity(i); ++v) c.values.insert(v);
  }
  return c;
}

bool Constraint::admits(double v) const {
  if (!continuous) return values.count(static_cast<int>(v)) > 0;
  return (lo_closed ? v >= lo : v > lo) && v <= hi;
}

bool LeafRecord::matches(const Point& x) const {
  for (std::size_t i = 0; i < predicates.size(); ++i) {
    if (!predicates[i].admits(x[i])) return false;
  }
  return true;
}

bool LeafRecord::matches(const PartialQuery& x) const {
  for (std::size_t i = 0; i < predicates.size(); ++i) {
    if (!x.is_missing(i) && !predicates[i].admits(*x[i])) return false;
  }
  return true;
}

namespace {

class Budget {
 public:
  Budget(const QueryOracle& o, std::optional<std::size_t> cap) : o_(o), start_(o.queries()), cap_(cap) {}
  void check() const {
    if (cap_ && o_.queries() - start_ >= *cap_) {
      throw BudgetExhausted("tree extraction exceeded its query budget");
    }
  }

 private:
  const QueryOracle& o_;
  std::size_t start_;
  std::optional<std::size_t> cap_;
};

Constraint interval_of(const Piece& p) {
  Constraint c;
  c.lo = p.lo;
  c.hi = p.hi;
  c.lo_closed = p.lo_closed;
  return c;
}

Constraint set_of(const std::set<int>& s) {
  Constraint c;
  c.continuous = false;
  c.values = s;
  return c;
}

}  // namespace

ExtractedRuleSet path_find(QueryOracle& oracle, const TreeAttackOptions& opt) {
  const FeatureSpace& space = oracle.space();
  const std::size_t d = space.size();
  Budget budget(oracle, opt.max_queries);
  Rng rng(opt.seed);
  Point init = space.sample(rng);
  // Start on the granularity grid so that snapped thresholds classify the
  // start point exactly as the true ones do.
  for (std::size_t i = 0; i < d; ++i) {
    if (space.is_continuous(i)) init[i] = std::clamp(snap_down(init[i], opt.eps), space.lo(i), space.hi(i));
  }

  ExtractedRuleSet out;
  out.epsilon = opt.eps;
  std::deque<Point> queue{init};
  while (!queue.empty()) {
    budget.check();
    Point x = std::move(queue.front());
    queue.pop_front();
    const ResponseKey key = node_key(oracle.query(x));
    const NodeId id = key_to_id(key);
    const bool known = std::any_of(out.leaves.begin(), out.leaves.end(), [&](const LeafRecord& l) {
      return l.id == id && l.matches(x);
    });
    if (known) continue;

    LeafRecord rec{id, std::vector<Constraint>(d)};
    for (std::size_t i = 0; i < d; ++i) {
      budget.check();
      if (space.is_continuous(i)) {
        const auto pieces = line_search(oracle, x, i, opt.eps);
        for (const auto& p : pieces) {
          if (p.contains(x[i])) {
            rec.predicates[i] = interval_of(p);
          } else {
            Point next = x;
            next[i] = p.hi;
            queue.push_back(std::move(next));
          }
        }
      } else {
        const CategorySplit cs = category_split(oracle, x, i, key);
        rec.predicates[i] = set_of(cs.same);
        for (int v : cs.others) {
          Point next = x;
          next[i] = v;
          queue.push_back(std::move(next));
        }
      }
    }
    out.leaves.push_back(std::move(rec));
  }
  return out;
}

namespace {

struct AbortTopDown {};

class TopDown {
 public:
  TopDown(QueryOracle& o, const TreeAttackOptions& opt)
      : o_(o), space_(o.space()), opt_(opt), budget_(o, opt.max_queries) {}

  ExtractedRuleSet run() {
    const std::size_t d = space_.size();
    Context root{PartialQuery::missing(d), {}, std::nullopt};
    for (std::size_t i = 0; i < d; ++i) root.c.push_back(Constraint::full(space_, i));
    const OracleResponse r = o_.query(root.q);
    explore(node_key(r), r, root);
    ExtractedRuleSet out;
    out.epsilon = opt_.eps;
    out.leaves = std::move(leaves_);
    return out;
  }

 private:
  struct Context {
    PartialQuery q;
    std::vector<Constraint> c;
    std::optional<std::size_t> last;  // feature whose search produced this node
  };

  struct Visited {
    ResponseKey key;
    std::vector<Constraint> region;
  };

  bool visited(const ResponseKey& key, const PartialQuery& q) const {
    for (const auto& v : visited_) {
      if (v.key != key) continue;
      bool inside = true;
      for (std::size_t i = 0; i < q.size() && inside; ++i) {
        if (!q.is_missing(i)) inside = v.region[i].admits(*q[i]);
      }
      if (inside) return true;
    }
    return false;
  }

  // The feature the halting node splits on, or nullopt at a leaf.
  std::optional<std::size_t> split_feature(const ResponseKey& key, const OracleResponse& r,
                                           const PartialQuery& q) {
    if (o_.policy().reveal_fields && r.fields) {
      std::vector<std::size_t> extra;
      for (std::size_t f : *r.fields) {
        if (q.is_missing(f)) extra.push_back(f);
      }
      if (extra.empty()) return std::nullopt;
      if (extra.size() > 1) throw AbortTopDown{};
      return extra.front();
    }
    std::vector<std::size_t> movers;
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (!q.is_missing(i)) continue;
      budget_.check();
      PartialQuery p = q;
      p.set(i, space_.is_continuous(i) ? 0.5 * (space_.lo(i) + space_.hi(i)) : 0.0);
      if (node_key(o_.query(p)) != key) movers.push_back(i);
    }
    if (movers.empty()) return std::nullopt;
    if (movers.size() > 1) throw AbortTopDown{};
    return movers.front();
  }

  void explore(const ResponseKey& key, const OracleResponse& r, const Context& ctx) {
    if (visited(key, ctx.q)) return;
    budget_.check();
    const auto feature = split_feature(key, r, ctx.q);
    if (!feature) {
      leaf(key, ctx);
      return;
    }
    visited_.push_back({key, ctx.c});
    const std::size_t j = *feature;
    if (space_.is_continuous(j)) {
      const auto pieces = line_search(o_, ctx.q, j, {space_.lo(j), space_.hi(j), true}, opt_.eps, node_key);
      for (const auto& p : pieces) descend(ctx, j, p);
    } else {
      std::set<int> all;
      for (int v = 0; v < space_.arity(j); ++v) all.insert(v);
      const CategorySplit cs = category_split(o_, ctx.q, j, all, nullptr, node_key);
      for (std::size_t g = 0; g < cs.others.size(); ++g) {
        Context next = ctx;
        next.q.set(j, cs.others[g]);
        next.c[j] = set_of(cs.groups[g]);
        next.last = j;
        explore(cs.keys[g], cs.responses[g], next);
      }
    }
  }

  void descend(const Context& ctx, std::size_t j, const Piece& p) {
    Context next = ctx;
    next.q.set(j, p.hi);
    next.c[j] = interval_of(p);
    next.last = j;
    explore(p.key, p.response, next);
  }

  // Features fixed before the last search may be split again below nodes
  // that were resolved afterwards; re-scan them within their constraints.
  void leaf(const ResponseKey& key, Context ctx) {
    std::vector<Context> branches;
    std::vector<std::pair<ResponseKey, OracleResponse>> branch_resp;
    for (std::size_t i : ctx.q.specified()) {
      if (ctx.last && i == *ctx.last) continue;
      budget_.check();
      if (space_.is_continuous(i)) {
        const Constraint& c = ctx.c[i];
        const auto pieces = line_search(o_, ctx.q, i, {c.lo, c.hi, c.lo_closed}, opt_.eps, node_key);
        if (pieces.size() == 1) continue;
        for (const auto& p : pieces) {
          if (p.contains(*ctx.q[i]) && p.key == key) continue;
          Context next = ctx;
          next.q.set(i, p.hi);
          next.c[i] = interval_of(p);
          next.last = i;
          branches.push_back(std::move(next));
          branch_resp.emplace_back(p.key, p.response);
        }
        for (const auto& p : pieces) {
          if (p.contains(*ctx.q[i])) ctx.c[i] = interval_of(p);
        }
      } else {
        const CategorySplit cs = category_split(o_, ctx.q, i, ctx.c[i].values, &key, node_key);
        for (std::size_t g = 0; g < cs.others.size(); ++g) {
          Context next = ctx;
          next.q.set(i, cs.others[g]);
          next.c[i] = set_of(cs.groups[g]);
          next.last = i;
          branches.push_back(std::move(next));
          branch_resp.emplace_back(cs.keys[g], cs.responses[g]);
        }
        ctx.c[i].values = cs.same;
      }
    }
    visited_.push_back({key, ctx.c});
    leaves_.push_back({key_to_id(key), ctx.c});
    for (std::size_t b = 0; b < branches.size(); ++b) {
      explore(branch_resp[b].first, branch_resp[b].second, branches[b]);
    }
  }

  QueryOracle& o_;
  const FeatureSpace& space_;
  TreeAttackOptions opt_;
  Budget budget_;
  std::vector<Visited> visited_;
  std::vector<LeafRecord> leaves_;
};

}  // namespace

ExtractedRuleSet top_down_find(QueryOracle& oracle, const TreeAttackOptions& opt) {
  if (!oracle.policy().allow_partial) {
    throw std::invalid_argument("top-down extraction needs an API that accepts incomplete queries");
  }
  try {
    return TopDown(oracle, opt).run();
  } catch (const AbortTopDown&) {
    ExtractedRuleSet r = path_find(oracle, opt);
    r.fell_back = true;
    return r;
  }
}

RuleSetPredictor::RuleSetPredictor(ExtractedRuleSet rules, int classes, std::optional<int> fallback)
    : rules_(std::move(rules)), classes_(classes), fallback_(fallback) {}

const LeafRecord& RuleSetPredictor::match(const Point& x) const {
  for (const auto& l : rules_.leaves) {
    if (l.matches(x)) return l;
  }
  throw UncoveredRegion("no extracted rule covers the query");
}

int RuleSetPredictor::label(const Point& x) const {
  for (const auto& l : rules_.leaves) {
    if (l.matches(x)) return static_cast<int>(l.id.output);
  }
  if (fallback_) return *fallback_;
  throw UncoveredRegion("no extracted rule covers the query");
}

ProbVector RuleSetPredictor::proba(const Point& x) const {
  const int y = label(x);
  ProbVector p(classes_, 0.0);
  p[y] = 1.0;
  return p;
}

Predictor RuleSetPredictor::as_predictor() const {
  Predictor p;
  p.label = [self = *this](const Point& x) { return self.label(x); };
  return p;
}

namespace {

struct Rule {
  const LeafRecord* leaf;
  std::vector<Constraint> box;  // clipped to the current region
};

bool overlaps(const Constraint& a, const Constraint& region) {
  if (!a.continuous) {
    return std::any_of(a.values.begin(), a.values.end(),
                       [&](int v) { return region.values.count(v) > 0; });
  }
  // Intervals of the form (lo, hi] possibly closed at lo.
  const double lo = std::max(a.lo, region.lo), hi = std::min(a.hi, region.hi);
  if (lo < hi) return true;
  if (lo > hi) return false;
  const bool lo_in_a = a.lo_closed || a.lo < lo;
  const bool lo_in_r = region.lo_closed || region.lo < lo;
  return lo_in_a && lo_in_r;
}

bool covers(const Constraint& a, const Constraint& region) {
  if (!a.continuous) {
    return std::all_of(region.values.begin(), region.values.end(),
                       [&](int v) { return a.values.count(v) > 0; });
  }
  if (a.hi < region.hi) return false;
  if (a.lo < region.lo) return true;
  return a.lo == region.lo && (a.lo_closed || !region.lo_closed);
}

}  // namespace

DecisionTree ruleset_to_tree(const ExtractedRuleSet& r, const FeatureSpace& space, int classes,
                             bool regression) {
  DecisionTree t;
  t.classes = classes;
  t.regression = regression;
  const std::size_t d = space.size();
  std::vector<Constraint> full;
  for (std::size_t i = 0; i < d; ++i) full.push_back(Constraint::full(space, i));

  auto make_leaf = [&](const LeafRecord& l) {
    TreeNode n;
    n.label = regression ? 0 : static_cast<int>(l.id.output);
    if (regression) n.value = l.id.output;
    n.confidence = l.id.confidence;
    t.nodes.push_back(std::move(n));
    return static_cast<int>(t.nodes.size() - 1);
  };

  std::function<int(const std::vector<Constraint>&, const std::vector<const LeafRecord*>&)> build =
      [&](const std::vector<Constraint>& region, const std::vector<const LeafRecord*>& rules) -> int {
    std::vector<const LeafRecord*> live;
    for (const auto* l : rules) {
      bool hit = true;
      for (std::size_t i = 0; i < d && hit; ++i) hit = overlaps(l->predicates[i], region[i]);
      if (hit) live.push_back(l);
    }
    if (live.empty()) throw UncoveredRegion("extracted rules leave part of the space uncovered");
    const LeafRecord* cover = nullptr;
    for (const auto* l : live) {
      bool all = true;
      for (std::size_t i = 0; i < d && all; ++i) all = covers(l->predicates[i], region[i]);
      if (all) {
        cover = l;
        break;
      }
    }
    const bool same = std::all_of(live.begin(), live.end(), [&](const LeafRecord* l) { return l->id == live[0]->id; });
    if (cover && (live.size() == 1 || same)) return make_leaf(*cover);

    // Split on the first rule boundary that falls strictly inside the region.
    for (std::size_t i = 0; i < d; ++i) {
      if (!region[i].continuous) continue;
      for (const auto* l : live) for (const double cut : {l->predicates[i].lo, l->predicates[i].hi}) {
        if (!(cut > region[i].lo && cut < region[i].hi)) continue;
        if (!(space.lo(i) < cut && cut < space.hi(i))) continue;
        auto left = region, right = region;
        left[i].hi = cut;
        right[i].lo = cut;
        right[i].lo_closed = false;
        const int v = static_cast<int>(t.nodes.size());
        t.nodes.emplace_back();
        const int a = build(left, live);
        const int b = build(right, live);
        TreeNode& n = t.nodes[v];
        n.kind = SplitKind::Threshold;
        n.feature = static_cast<int>(i);
        n.threshold = cut;
        n.children = {a, b};
        n.label = t.nodes[a].label;
        n.confidence = t.nodes[a].confidence;
        return v;
      }
    }
    for (std::size_t i = 0; i < d; ++i) {
      if (region[i].continuous) continue;
      for (const auto* l : live) {
        std::set<int> left_vals;
        for (int v : l->predicates[i].values) {
          if (region[i].values.count(v)) left_vals.insert(v);
        }
        if (left_vals.empty() || left_vals.size() == region[i].values.size()) continue;
        auto left = region, right = region;
        left[i].values = left_vals;
        for (int v : left_vals) right[i].values.erase(v);
        const int v = static_cast<int>(t.nodes.size());
        t.nodes.emplace_back();
        const int a = build(left, live);
        const int b = build(right, live);
        TreeNode& n = t.nodes[v];
        n.kind = SplitKind::CategoricalBinary;
        n.feature = static_cast<int>(i);
        // Values outside the region are unreachable here; keeping the set
        // proper over the whole arity keeps the node valid.
        n.left_set.assign(left_vals.begin(), left_vals.end());
        n.children = {a, b};
        n.label = t.nodes[a].label;
        n.confidence = t.nodes[a].confidence;
        return v;
      }
    }
    // Every live rule now covers the whole region; the first one wins.
    return make_leaf(cover ? *cover : *live[0]);
  };

  std::vector<const LeafRecord*> all;
  for (const auto& l : r.leaves) all.push_back(&l);
  build(full, all);
  return t;
}

json ruleset_to_json(const ExtractedRuleSet& r) {
  json leaves = json::array();
  for (const auto& l : r.leaves) {
    json cons = json::array();
    for (std::size_t i = 0; i < l.predicates.size(); ++i) {
      const Constraint& c = l.predicates[i];
      if (c.continuous) {
        cons.push_back({{"feature", i}, {"interval", {c.lo, c.hi}}, {"lo_closed", c.lo_closed}});
      } else {
        cons.push_back({{"feature", i}, {"set", std::vector<int>(c.values.begin(), c.values.end())}});
      }
    }
    leaves.push_back({{"id", {{"output", l.id.output}, {"confidence", l.id.confidence}}},
                      {"constraints", std::move(cons)}});
  }
  return {{"epsilon", r.epsilon}, {"fell_back", r.fell_back}, {"leaves", std::move(leaves)}};
}

ExtractedRuleSet ruleset_from_json(const json& j) {
  ExtractedRuleSet r;
  r.epsilon = j.at("epsilon").get<double>();
  r.fell_back = j.value("fell_back", false);
  for (const auto& lj : j.at("leaves")) {
    LeafRecord l;
    l.id = {lj.at("id").at("output").get<double>(), lj.at("id").at("confidence").get<double>()};
    for (const auto& cj : lj.at("constraints")) {
      Constraint c;
      if (cj.contains("interval")) {
        c.lo = cj["interval"][0].get<double>();
        c.hi = cj["interval"][1].get<double>();
        c.lo_closed = cj.value("lo_closed", false);
      } else {
        c.continuous = false;
        for (int v : cj.at("set")) c.values.insert(v);
      }
      l.predicates.push_back(std::move(c));
    }
    r.leaves.push_back(std::move(l));
  }
  return r;
}

}  // namespace mexlab
