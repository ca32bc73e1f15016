#include "mexlab/attacks/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "mexlab/core/io.hpp"
#include "mexlab/core/linalg.hpp"
#include "mexlab/core/rng.hpp"
#include "mexlab/models/poly.hpp"
#include "mexlab/models/predict.hpp"
#include "mexlab/training/svm.hpp"

namespace mexlab {

double PolyBoundary::score(const Point& x) const {
  const auto phi = poly_feature_map(x, degree);
  double s = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) s += w[i] * phi[i];
  return s;
}

Predictor PolyBoundary::as_predictor() const {
  Predictor p;
  p.label = [self = *this](const Point& x) { return self.label(x); };
  return p;
}

namespace {

void require_binary_continuous(const QueryOracle& oracle) {
  if (oracle.classes() != 2) throw std::invalid_argument("boundary search needs a binary target");
  const auto& sp = oracle.space();
  for (std::size_t j = 0; j < sp.size(); ++j) {
    if (!sp.is_continuous(j)) throw std::invalid_argument("boundary search needs continuous features");
  }
}

Point lerp(const Point& a, const Point& b, double t) {
  Point x(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) x[i] = a[i] + t * (b[i] - a[i]);
  return x;
}

double distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Bisects the segment a -> b (labels differ) until it is shorter than eps,
// returning its midpoint.
Point bisect(QueryOracle& oracle, const Point& a, int label_a, const Point& b, double eps) {
  double lo = 0.0, hi = 1.0;
  const double len = distance(a, b);
  while ((hi - lo) * len > eps) {
    const double mid = 0.5 * (lo + hi);
    if (oracle.query(lerp(a, b, mid)).label == label_a) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lerp(a, b, 0.5 * (lo + hi));
}

}  // namespace

PolyBoundary lowd_meek_poly(QueryOracle& oracle, int degree, const LowdMeekOptions& opt) {
  require_binary_continuous(oracle);
  if (!(opt.eps > 0)) throw std::invalid_argument("eps must be positive");
  const FeatureSpace& sp = oracle.space();
  const std::size_t d = sp.size();
  const std::size_t dim = poly_feature_dim(d, degree);
  if (dim > opt.max_dim) {
    throw std::invalid_argument("expanded dimension " + std::to_string(dim) + " exceeds the cap");
  }
  Rng rng(opt.seed);

  // Every labelled probe is kept; segments end at a random point of the
  // other class so that boundaries with several components all get hit.
  std::vector<Point> pool[2];
  for (std::size_t probe = 0; probe < opt.max_probes && (pool[0].empty() || pool[1].empty()); ++probe) {
    Point x = sp.sample(rng);
    pool[oracle.query(x).label].push_back(std::move(x));
  }
  if (pool[0].empty() || pool[1].empty()) {
    throw std::runtime_error("could not find both classes; the target looks constant");
  }
  const Point anchor1 = pool[1].front();

  // Boundary points on segments from fresh random points; the points are in
  // general position with probability one. Repeats of an earlier point (as
  // happens in one dimension) are dropped.
  const std::size_t want = dim - 1 + opt.extra_points;
  const std::size_t max_tries = 20 * want + 20;
  std::vector<Point> found;
  for (std::size_t t = 0; found.size() < want && t < max_tries; ++t) {
    Point x = sp.sample(rng);
    const int y = oracle.query(x).label;
    const auto& other = pool[1 - y];
    const Point& to = other[rng.below(other.size())];
    Point b = bisect(oracle, x, y, to, opt.eps);
    pool[y].push_back(std::move(x));
    const bool repeat = std::any_of(found.begin(), found.end(), [&](const Point& q) {
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) dist = std::max(dist, std::abs(q[j] - b[j]));
      return dist < 100.0 * opt.eps;
    });
    if (!repeat) found.push_back(std::move(b));
  }
  if (found.size() < want && d > 1) {
    throw std::runtime_error("could not collect enough distinct boundary points");
  }
  const std::size_t rows = found.size();
  Eigen::MatrixXd a(rows, dim);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto phi = poly_feature_map(found[r], degree);
    for (std::size_t c = 0; c < dim; ++c) a(r, c) = phi[c];
  }

  Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(std::max(rows, dim), dim);
  padded.topRows(rows) = a;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(padded, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const Eigen::MatrixXd& v = svd.matrixV();
  // Numerical null space; its last column is the best fit when noise leaves
  // no singular value under the cut.
  const double cut = 1e-6 * std::max(sv(0), 1e-300);
  Eigen::Index first = sv.size() - 1;
  while (first > 0 && sv(first - 1) <= cut) --first;
  const Eigen::MatrixXd null = v.rightCols(sv.size() - first);

  Eigen::VectorXd w;
  if (null.cols() == 1) {
    w = null.col(0);
  } else {
    // Several polynomials vanish on every boundary point (e.g. a line times
    // any other line). Prefer the one with least higher-degree energy.
    const auto exps = poly_exponents(d, degree);
    Eigen::VectorXd pen(dim);
    for (std::size_t c = 0; c < dim; ++c) {
      const int deg = std::accumulate(exps[c].begin(), exps[c].end(), 0);
      pen(c) = static_cast<double>(deg) * deg;
    }
    const Eigen::MatrixXd q = null.transpose() * pen.asDiagonal() * null;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
    w = null * es.eigenvectors().col(0);
  }
  w.normalize();

  PolyBoundary out;
  out.degree = degree;
  out.w.assign(w.data(), w.data() + w.size());
  if (out.score(anchor1) < 0.0) {
    for (double& c : out.w) c = -c;
  }
  return out;
}

BinaryLR lowd_meek(QueryOracle& oracle, const LowdMeekOptions& opt) {
  const PolyBoundary pb = lowd_meek_poly(oracle, 1, opt);
  // Degree-1 features are the constant and x_1..x_d in enumeration order.
  const std::size_t d = oracle.space().size();
  const auto exps = poly_exponents(d, 1);
  BinaryLR lr{std::vector<double>(d, 0.0), 0.0};
  for (std::size_t c = 0; c < exps.size(); ++c) {
    const auto it = std::find(exps[c].begin(), exps[c].end(), 1);
    if (it == exps[c].end()) {
      lr.beta = pb.w[c];
    } else {
      lr.w[static_cast<std::size_t>(it - exps[c].begin())] = pb.w[c];
    }
  }
  const double n = norm2(lr.w);
  if (!(n > 0)) throw std::runtime_error("singular boundary system");
  for (double& c : lr.w) c /= n;
  lr.beta /= n;
  return lr;
}

ModelSpec fit_surrogate(const SurrogateSpec& s, const FeatureSpace& space, int classes,
                        const std::vector<LabeledPoint>& rows, const OptimizerConfig& cfg) {
  std::vector<int> seen(classes, 0);
  int present = 0;
  for (const auto& r : rows) {
    if (seen.at(r.y)++ == 0) ++present;
  }
  if (present < 2) throw std::invalid_argument("surrogate training needs two observed classes");
  if (s.kind == SurrogateSpec::Kind::Svm) {
    if (classes != 2) throw std::invalid_argument("SVM surrogates are binary");
    return fit_svm_rows(s.kernel, rows, cfg);
  }
  ModelSpec init = initial_model(s.family, space.size(), classes, s.options, cfg.seed);
  if (auto* k = std::get_if<KernelLR>(&init)) {
    Rng rng(cfg.seed ^ 0x5bd1e995ULL);
    for (int r = 0; r < s.options.representers; ++r) k->representers.push_back(space.sample(rng));
  }
  return fit_to_targets(init, one_hot_targets(rows, classes), cfg, s.options.train_representers).model;
}

double margin(const ModelSpec& m, const Point& x) {
  if (const auto* svm = std::get_if<SVM>(&m)) return std::abs(svm->decision_value(x));
  if (std::holds_alternative<DecisionTree>(m)) {
    throw std::invalid_argument("margin is undefined for trees");
  }
  const ProbVector p = predict_proba(m, x);
  if (p.size() == 2) return std::abs(p[1] - 0.5);
  double a = -1.0, b = -1.0;
  for (double v : p) {
    if (v > a) {
      b = a;
      a = v;
    } else if (v > b) {
      b = v;
    }
  }
  return a - b;
}

const char* strategy_name(RetrainStrategy s) {
  switch (s) {
    case RetrainStrategy::Uniform:
      return "uniform";
    case RetrainStrategy::LineSearch:
      return "line_search";
    case RetrainStrategy::Adaptive:
      return "adaptive";
  }
  return "?";
}

RetrainStrategy strategy_from_name(const std::string& name) {
  for (auto s : {RetrainStrategy::Uniform, RetrainStrategy::LineSearch, RetrainStrategy::Adaptive}) {
    if (name == strategy_name(s)) return s;
  }
  throw std::invalid_argument("unknown retraining strategy: " + name);
}

void RetrainConfig::validate() const {
  if (budget < 1) throw std::invalid_argument("retraining budget must be positive");
  if (strategy == RetrainStrategy::Adaptive) {
    if (rounds < 2) throw std::invalid_argument("adaptive retraining needs at least two rounds");
    if (budget < static_cast<std::size_t>(rounds)) {
      throw std::invalid_argument("budget is smaller than one query per round");
    }
    if (pool_factor < 1) throw std::invalid_argument("candidate pool factor must be positive");
  }
  if (strategy == RetrainStrategy::LineSearch && line_search_steps < 1) {
    throw std::invalid_argument("line search needs at least one bisection step");
  }
  cfg.validate();
}

namespace {

bool two_classes(const std::vector<LabeledPoint>& rows) {
  for (const auto& r : rows) {
    if (r.y != rows.front().y) return true;
  }
  return false;
}

void query_into(QueryOracle& oracle, const std::vector<Point>& xs, std::vector<LabeledPoint>& rows) {
  const auto resp = oracle.query_batch(xs);
  for (std::size_t i = 0; i < xs.size(); ++i) rows.push_back({xs[i], resp[i].label});
}

}  // namespace

RetrainResult retrain(QueryOracle& oracle, const RetrainConfig& rc, std::uint64_t seed,
                      const RoundEvaluator& eval) {
  rc.validate();
  const FeatureSpace& sp = oracle.space();
  const int classes = oracle.classes();
  Rng rng(seed);
  RetrainResult out;
  auto& rows = out.sample;
  const std::size_t start = oracle.queries();
  auto spent = [&] { return oracle.queries() - start; };

  auto fit = [&]() { return fit_surrogate(rc.surrogate, sp, classes, rows, rc.cfg); };
  auto record = [&](int round) {
    if (!eval) return;
    const auto [rt, ru] = eval(out.model);
    out.curve.push_back({round, spent(), rt, ru});
  };

  switch (rc.strategy) {
    case RetrainStrategy::Uniform: {
      std::vector<Point> xs;
      for (std::size_t i = 0; i < rc.budget; ++i) xs.push_back(sp.sample(rng));
      query_into(oracle, xs, rows);
      out.model = fit();
      record(1);
      break;
    }
    case RetrainStrategy::LineSearch: {
      // Each new uniform point is paired with the latest earlier point of
      // another label and the segment between them is bisected.
      while (spent() < rc.budget) {
        const Point x = sp.sample(rng);
        const int y = oracle.query(x).label;
        rows.push_back({x, y});
        const LabeledPoint* other = nullptr;
        for (auto it = rows.rbegin() + 1; it != rows.rend(); ++it) {
          if (it->y != y) {
            other = &*it;
            break;
          }
        }
        if (!other) continue;
        Point a = x, b = other->x;
        const int ya = y;
        const int yb = other->y;
        for (int s = 0; s < rc.line_search_steps && spent() < rc.budget; ++s) {
          const Point mid = lerp(a, b, 0.5);
          const int ym = oracle.query(mid).label;
          rows.push_back({mid, ym});
          if (ym == ya) {
            a = mid;
          } else {
            // Multiclass: any label change marks a boundary; keep bisecting
            // towards the first change.
            b = mid;
            if (ym != yb) break;
          }
        }
      }
      out.model = fit();
      record(1);
      break;
    }
    case RetrainStrategy::Adaptive: {
      const std::size_t batch = rc.budget / static_cast<std::size_t>(rc.rounds);
      bool have_model = false;
      for (int round = 1; round <= rc.rounds; ++round) {
        const std::size_t take = round == rc.rounds ? rc.budget - spent() : batch;
        std::vector<Point> xs;
        if (!have_model) {
          for (std::size_t i = 0; i < take; ++i) xs.push_back(sp.sample(rng));
        } else {
          // Candidates are scored by the surrogate alone: no oracle cost.
          std::vector<Point> pool;
          const std::size_t n_pool = rc.pool_factor * std::max<std::size_t>(take, 1);
          for (std::size_t i = 0; i < n_pool; ++i) pool.push_back(sp.sample(rng));
          std::vector<double> score(pool.size());
          for (std::size_t i = 0; i < pool.size(); ++i) score[i] = margin(out.model, pool[i]);
          std::vector<std::size_t> idx(pool.size());
          std::iota(idx.begin(), idx.end(), 0);
          std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
          for (std::size_t i = 0; i < take; ++i) xs.push_back(pool[idx[i]]);
        }
        query_into(oracle, xs, rows);
        if (two_classes(rows)) {
          out.model = fit();
          have_model = true;
          record(round);
        }
      }
      if (!have_model) throw std::invalid_argument("surrogate training needs two observed classes");
      break;
    }
  }
  if (spent() != rc.budget) throw std::logic_error("retraining did not spend its budget exactly");
  return out;
}

std::string round_curve_csv(const std::vector<RoundStats>& curve) {
  std::ostringstream out;
  out << "round,queries,r_test,r_unif\n";
  for (const auto& r : curve) {
    out << r.round << ',' << r.queries << ',' << format_double(r.r_test) << ','
        << format_double(r.r_unif) << '\n';
  }
  return out.str();
}

ExtractAndTestResult extract_and_test(QueryOracle& oracle, const std::vector<Candidate>& candidates,
                                      std::size_t sample_size, std::size_t probe_size,
                                      std::uint64_t seed) {
  if (candidates.empty()) throw std::invalid_argument("extract-and-test needs a candidate");
  const FeatureSpace& sp = oracle.space();
  Rng rng(seed);
  std::vector<Point> xs, probes;
  for (std::size_t i = 0; i < sample_size; ++i) xs.push_back(sp.sample(rng));
  for (std::size_t i = 0; i < probe_size; ++i) probes.push_back(sp.sample(rng));
  std::vector<LabeledPoint> sample, probe_rows;
  query_into(oracle, xs, sample);
  query_into(oracle, probes, probe_rows);

  ExtractAndTestResult out;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    ModelSpec m = c.fit(sample);
    double err = 0.0;
    for (const auto& r : probe_rows) err += predict_class(m, r.x) != r.y;
    err = probe_rows.empty() ? 0.0 : err / probe_rows.size();
    out.scoreboard.push_back({c.name, err});
    if (err < best) {
      best = err;
      out.best = std::move(m);
      out.best_name = c.name;
    }
  }
  return out;
}

}  // namespace mexlab
