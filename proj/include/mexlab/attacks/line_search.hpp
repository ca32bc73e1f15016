#pragma once

#include <functional>
#include <set>
#include <vector>

#include "mexlab/oracle/oracle.hpp"

namespace mexlab {

/// What counts as "the same output" during a search, e.g. a tree node id or
/// a probability vector.
using ResponseKey = std::vector<double>;
using KeyFn = std::function<ResponseKey(const OracleResponse&)>;

// (output, confidence) of a tree node. Throws when confidences are hidden.
ResponseKey node_key(const OracleResponse& r);
// The full probability vector (or the label when probabilities are hidden).
ResponseKey output_key(const OracleResponse& r);
NodeId key_to_id(const ResponseKey& k);

/// A maximal run of the searched feature with constant output:
/// [lo, hi] for the first piece when lo_closed, (lo, hi] otherwise.
struct Piece {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = false;
  ResponseKey key;
  double sample = 0.0;      // a queried value inside the piece
  OracleResponse response;  // the response observed at sample

  bool contains(double v) const { return (lo_closed ? v >= lo : v > lo) && v <= hi; }
};

// Values of the granularity grid: multiples of eps computed as k / (1/eps)
// when 1/eps is integral, so decimal thresholds are hit exactly.
double grid_value(long long k, double eps);
// The unique multiple of eps in (t - eps, t].
double snap_down(double t, double eps);

struct SearchRange {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
};

// Binary-searches feature i of base over the range at granularity eps. Every
// other coordinate of base is held fixed (MISSING entries stay missing).
// Each threshold t is reported as the multiple of eps in (t - eps, t].
std::vector<Piece> line_search(QueryOracle& oracle, const PartialQuery& base, std::size_t i,
                               const SearchRange& range, double eps, const KeyFn& key);

// Full-range search of a complete query.
std::vector<Piece> line_search(QueryOracle& oracle, const Point& x, std::size_t i, double eps,
                               const KeyFn& key = node_key);

struct CategorySplit {
  std::set<int> same;            // S: values giving the current key
  std::vector<int> others;       // V: one representative per other key
  std::vector<std::set<int>> groups;  // values of each representative's key
  std::vector<ResponseKey> keys;      // key of each representative
  std::vector<OracleResponse> responses;
};

// Queries feature i of base at each allowed value (the current value is not
// re-queried when current is given).
CategorySplit category_split(QueryOracle& oracle, const PartialQuery& base, std::size_t i,
                             const std::set<int>& allowed, const ResponseKey* current,
                             const KeyFn& key);

CategorySplit category_split(QueryOracle& oracle, const Point& x, std::size_t i,
                             const ResponseKey& current, const KeyFn& key = node_key);

}  // namespace mexlab
