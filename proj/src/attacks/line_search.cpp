#include "mexlab/attacks/line_search.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace mexlab {

ResponseKey node_key(const OracleResponse& r) {
  const NodeId id = node_id(r);
  return {id.output, id.confidence};
}

ResponseKey output_key(const OracleResponse& r) {
  if (r.probs) return *r.probs;
  return {static_cast<double>(r.label)};
}

NodeId key_to_id(const ResponseKey& k) {
  if (k.size() != 2) throw std::invalid_argument("not a node key");
  return {k[0], k[1]};
}

double grid_value(long long k, double eps) {
  const double inv = std::round(1.0 / eps);
  if (inv >= 1 && std::abs(inv * eps - 1.0) < 1e-12) return static_cast<double>(k) / inv;
  return static_cast<double>(k) * eps;
}

double snap_down(double t, double eps) {
  auto k = static_cast<long long>(std::floor(t / eps));
  while (grid_value(k + 1, eps) <= t) ++k;
  while (grid_value(k, eps) > t) --k;
  return grid_value(k, eps);
}

namespace {

// Index space of the search grid over a range.
class Grid {
 public:
  Grid(const SearchRange& r, double eps) : r_(r), eps_(eps) {
    kmin_ = static_cast<long long>(std::floor(r.lo / eps));
    while (grid_value(kmin_, eps) <= r.lo) ++kmin_;
    while (grid_value(kmin_ - 1, eps) > r.lo) --kmin_;
    kmax_ = static_cast<long long>(std::ceil(r.hi / eps));
    while (grid_value(kmax_, eps) >= r.hi) --kmax_;
    while (grid_value(kmax_ + 1, eps) < r.hi) ++kmax_;
    offset_ = r.lo_closed ? 1 : 0;
    const long long interior = std::max(0LL, kmax_ - kmin_ + 1);
    size_ = offset_ + interior + 1;
  }

  long long size() const { return size_; }
  double value(long long j) const {
    if (j == size_ - 1) return r_.hi;
    if (j == 0 && r_.lo_closed) return r_.lo;
    return grid_value(kmin_ + j - offset_, eps_);
  }

 private:
  SearchRange r_;
  double eps_;
  long long kmin_ = 0, kmax_ = 0, offset_ = 0, size_ = 0;
};

}  // namespace

std::vector<Piece> line_search(QueryOracle& oracle, const PartialQuery& base, std::size_t i,
                               const SearchRange& range, double eps, const KeyFn& key) {
  if (!(eps > 0)) throw std::invalid_argument("line_search: eps must be positive");
  if (range.hi < range.lo || (range.hi == range.lo && !range.lo_closed)) {
    throw std::invalid_argument("line_search: empty range");
  }
  const Grid grid(range, eps);
  struct Seen {
    ResponseKey key;
    OracleResponse resp;
  };
  std::map<long long, Seen> seen;
  auto probe = [&](long long j) -> const Seen& {
    auto it = seen.find(j);
    if (it != seen.end()) return it->second;
    PartialQuery q = base;
    q.set(i, grid.value(j));
    OracleResponse r = oracle.query(q);
    ResponseKey k = key(r);
    return seen.emplace(j, Seen{std::move(k), std::move(r)}).first->second;
  };

  const long long last = grid.size() - 1;
  probe(0);
  probe(last);
  std::vector<long long> bounds;
  std::vector<std::pair<long long, long long>> stack{{0, last}};
  while (!stack.empty()) {
    auto [l, r] = stack.back();
    stack.pop_back();
    if (r <= l || probe(l).key == probe(r).key) continue;
    if (r - l == 1) {
      bounds.push_back(l);
      continue;
    }
    const long long m = l + (r - l) / 2;
    probe(m);
    stack.push_back({m, r});
    stack.push_back({l, m});
  }
  std::sort(bounds.begin(), bounds.end());

  std::vector<Piece> pieces;
  double lo = range.lo;
  bool closed = range.lo_closed;
  for (long long b : bounds) {
    const Seen& s = seen.at(b);
    pieces.push_back({lo, grid.value(b), closed, s.key, grid.value(b), s.resp});
    lo = grid.value(b);
    closed = false;
  }
  const Seen& s = seen.at(last);
  pieces.push_back({lo, range.hi, closed, s.key, grid.value(last), s.resp});
  return pieces;
}

std::vector<Piece> line_search(QueryOracle& oracle, const Point& x, std::size_t i, double eps,
                               const KeyFn& key) {
  const FeatureSpace& sp = oracle.space();
  if (!sp.is_continuous(i)) throw std::invalid_argument("line_search needs a continuous feature");
  return line_search(oracle, PartialQuery::complete(x), i, {sp.lo(i), sp.hi(i), true}, eps, key);
}

CategorySplit category_split(QueryOracle& oracle, const PartialQuery& base, std::size_t i,
                             const std::set<int>& allowed, const ResponseKey* current,
                             const KeyFn& key) {
  CategorySplit out;
  // -1 when feature i of base is MISSING.
  const int here = base.is_missing(i) ? -1 : static_cast<int>(*base[i]);
  for (int v : allowed) {
    ResponseKey k;
    OracleResponse resp;
    if (current && here == v) {
      k = *current;
    } else {
      PartialQuery q = base;
      q.set(i, v);
      resp = oracle.query(q);
      k = key(resp);
    }
    if (current && k == *current) {
      out.same.insert(v);
      continue;
    }
    auto it = std::find(out.keys.begin(), out.keys.end(), k);
    if (it == out.keys.end()) {
      out.others.push_back(v);
      out.groups.push_back({v});
      out.keys.push_back(std::move(k));
      out.responses.push_back(std::move(resp));
    } else {
      out.groups[it - out.keys.begin()].insert(v);
    }
  }
  return out;
}

CategorySplit category_split(QueryOracle& oracle, const Point& x, std::size_t i,
                             const ResponseKey& current, const KeyFn& key) {
  const FeatureSpace& sp = oracle.space();
  if (sp.is_continuous(i)) throw std::invalid_argument("category_split needs a categorical feature");
  std::set<int> all;
  for (int v = 0; v < sp.arity(i); ++v) all.insert(v);
  return category_split(oracle, PartialQuery::complete(x), i, all, &current, key);
}

}  // namespace mexlab
