#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "mexlab/attacks/line_search.hpp"
#include "mexlab/core/metrics.hpp"
#include "mexlab/models/models.hpp"

namespace mexlab {

inline constexpr double kDefaultTreeEps = 1e-3;

/// Per-feature predicate of a leaf: an interval for continuous features
/// ([lo, hi] when lo_closed, else (lo, hi]) or a value set for categorical ones.
struct Constraint {
  bool continuous = true;
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  std::set<int> values;

  static Constraint full(const FeatureSpace& space, std::size_t i);
  bool admits(double v) const;
  friend bool operator==(const Constraint&, const Constraint&) = default;
};

struct LeafRecord {
  NodeId id;
  std::vector<Constraint> predicates;

  bool matches(const Point& x) const;
  // MISSING entries match anything.
  bool matches(const PartialQuery& x) const;
};

struct ExtractedRuleSet {
  std::vector<LeafRecord> leaves;
  double epsilon = kDefaultTreeEps;
  bool fell_back = false;  // top-down gave up and ran path finding instead
};

struct BudgetExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UncoveredRegion : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TreeAttackOptions {
  double eps = kDefaultTreeEps;
  std::uint64_t seed = 0;
  std::optional<std::size_t> max_queries;
};

// Path finding from a random complete query. A popped query is skipped only
// when a recorded leaf has the same id and the query satisfies that leaf's
// predicates, which tolerates duplicate ids.
ExtractedRuleSet path_find(QueryOracle& oracle, const TreeAttackOptions& opt = {});

// Layer-by-layer extraction from the all-MISSING query. Uses the fields
// property when the API reveals it, else probes features one at a time.
ExtractedRuleSet top_down_find(QueryOracle& oracle, const TreeAttackOptions& opt = {});

/// First-matching-rule evaluation of an extracted rule set.
class RuleSetPredictor {
 public:
  // Without a fallback, points outside every rule raise UncoveredRegion.
  RuleSetPredictor(ExtractedRuleSet rules, int classes, std::optional<int> fallback = {});

  const LeafRecord& match(const Point& x) const;
  int label(const Point& x) const;
  ProbVector proba(const Point& x) const;
  Predictor as_predictor() const;

 private:
  ExtractedRuleSet rules_;
  int classes_;
  std::optional<int> fallback_;
};

// An explicit tree whose predictions equal the rule set's. Throws
// UncoveredRegion when the rules leave part of the space uncovered.
DecisionTree ruleset_to_tree(const ExtractedRuleSet& r, const FeatureSpace& space, int classes,
                             bool regression = false);

nlohmann::json ruleset_to_json(const ExtractedRuleSet& r);
ExtractedRuleSet ruleset_from_json(const nlohmann::json& j);

}  // namespace mexlab
