#include "mexlab/attacks/eqsolve.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mexlab/core/linalg.hpp"
#include "mexlab/core/rng.hpp"
#include "mexlab/models/predict.hpp"

namespace mexlab {

std::vector<Target> EquationSet::targets() const {
  std::vector<Target> t;
  t.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) t.push_back({xs[i], ps[i]});
  return t;
}

std::size_t BudgetSpec::budget() const {
  if (!(alpha > 0)) throw std::invalid_argument("budget alpha must be positive");
  const double m = std::ceil(alpha * static_cast<double>(k_unknowns));
  if (m < 1) throw std::invalid_argument("query budget is below one query");
  return static_cast<std::size_t>(m);
}

std::size_t family_unknowns(FamilyKind kind, std::size_t d, int classes, const FamilyOptions& opt) {
  ModelSpec m = initial_model(kind, d, classes, opt, 0);
  if (std::holds_alternative<KernelLR>(m)) {
    const auto s = static_cast<std::size_t>(opt.representers);
    return classes * s + classes + s * d;
  }
  return parameter_count(m);
}

namespace {

ProbVector probs_of(const OracleResponse& r) {
  if (!r.probs) throw std::invalid_argument("equation solving needs probability outputs");
  return *r.probs;
}

}  // namespace

EquationSet collect_uniform(QueryOracle& oracle, std::size_t m, std::uint64_t seed) {
  if (oracle.policy().outputs != OutputKind::Probabilities) {
    throw std::invalid_argument("equation solving needs probability outputs");
  }
  EquationSet eq;
  eq.xs = uniform_points(oracle.space(), m, seed);
  for (const auto& r : oracle.query_batch(eq.xs)) eq.ps.push_back(probs_of(r));
  return eq;
}

BinaryLR extract_binary_lr(QueryOracle& oracle, std::uint64_t seed, BinaryLrInfo* info) {
  const FeatureSpace& sp = oracle.space();
  const std::size_t d = sp.size();
  if (oracle.classes() != 2) throw std::invalid_argument("binary LR extraction needs two classes");
  if (oracle.policy().outputs != OutputKind::Probabilities) {
    throw std::invalid_argument("equation solving needs probability outputs");
  }
  for (std::size_t j = 0; j < d; ++j) {
    if (!sp.is_continuous(j)) throw std::invalid_argument("binary LR extraction needs continuous features");
  }
  BinaryLrInfo local;
  local.approximate = oracle.policy().decimals && *oracle.policy().decimals < 6;

  // The fixed design, chosen before any response is read.
  std::vector<Point> xs;
  bool unit = true;
  for (std::size_t j = 0; j < d; ++j) unit = unit && sp.admits(j, 0.0) && sp.admits(j, 1.0);
  const Point base = unit ? Point(d, 0.0) : sp.center();
  xs.push_back(base);
  for (std::size_t j = 0; j < d; ++j) {
    Point x = base;
    x[j] += unit ? 1.0 : 0.25 * (sp.hi(j) - sp.lo(j));
    xs.push_back(std::move(x));
  }

  Rng rng(seed);
  for (int attempt = 0;; ++attempt) {
    const auto resp = oracle.query_batch(xs);
    Matrix a(d + 1, d + 1);
    std::vector<double> b(d + 1);
    for (std::size_t r = 0; r <= d; ++r) {
      for (std::size_t j = 0; j < d; ++j) a(r, j) = xs[r][j];
      a(r, d) = 1.0;
      b[r] = logit(probs_of(resp[r])[1], 1e-12);
    }
    try {
      const auto sol = solve_linear(a, b);
      if (info) *info = local;
      return BinaryLR{std::vector<double>(sol.begin(), sol.begin() + d), sol[d]};
    } catch (const SingularMatrix&) {
      if (attempt == 3) throw;
      ++local.retries;
      for (auto& x : xs) x = sp.sample(rng);
    }
  }
}

OptimizerConfig extraction_config(FamilyKind kind, std::uint64_t seed) {
  OptimizerConfig cfg;
  const bool linear = kind == FamilyKind::BinaryLR || kind == FamilyKind::Softmax || kind == FamilyKind::OvR;
  // Any ridge biases an exactly determined system away from the target.
  cfg.l2_lambda = linear ? 0.0 : kExtractionLambda;
  cfg.tolerance = linear ? 1e-10 : 1e-7;
  cfg.solver = Solver::LBFGS;
  cfg.max_epochs = 5000;
  cfg.seed = seed;
  return cfg;
}

FitResult fit_equations(FamilyKind kind, const EquationSet& eq, std::size_t d, int classes,
                        const OptimizerConfig& cfg, const FamilyOptions& fam) {
  if (eq.size() == 0) throw std::invalid_argument("no equations to fit");
  ModelSpec init = initial_model(kind, d, classes, fam, cfg.seed);
  return fit_to_targets(init, eq.targets(), cfg, true);
}

namespace {

KernelLR random_klr(const FeatureSpace& sp, std::size_t s, double gamma, int classes,
                    std::uint64_t seed) {
  FamilyOptions fam;
  fam.representers = static_cast<int>(s);
  fam.gamma = gamma;
  KernelLR k = std::get<KernelLR>(initial_model(FamilyKind::KernelLR, sp.size(), classes, fam, seed));
  // The adversary does not know the data distribution: start uniform in X.
  Rng rng(seed ^ 0xa5a5a5a5ULL);
  for (std::size_t r = 0; r < s; ++r) k.representers.push_back(sp.sample(rng));
  return k;
}

}  // namespace

FitResult extract_by_loss_min(FamilyKind kind, QueryOracle& oracle, const BudgetSpec& budget,
                              const OptimizerConfig& cfg, const FamilyOptions& fam) {
  const std::size_t m = budget.budget();
  const EquationSet eq = collect_uniform(oracle, m, cfg.seed);
  const std::size_t d = oracle.space().size();
  if (kind == FamilyKind::KernelLR) {
    KernelLR init = random_klr(oracle.space(), fam.representers, fam.gamma, oracle.classes(), cfg.seed);
    return fit_to_targets(init, eq.targets(), cfg, true);
  }
  if (kind == FamilyKind::BinaryLR && oracle.classes() != 2) {
    throw std::invalid_argument("binary LR surrogate needs two classes");
  }
  return fit_equations(kind, eq, d, oracle.classes(), cfg, fam);
}

KlrExtraction extract_klr_representers(QueryOracle& oracle, std::size_t s_assumed, double gamma,
                                       const BudgetSpec& budget, const OptimizerConfig& cfg,
                                       int restarts) {
  if (s_assumed < 1) throw std::invalid_argument("at least one representer must be assumed");
  if (restarts < 1) throw std::invalid_argument("restarts must be positive");
  const std::size_t m = budget.budget();
  const auto targets = collect_uniform(oracle, m, cfg.seed).targets();
  KlrExtraction best;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    const std::uint64_t seed = cfg.seed + 7919ULL * static_cast<std::uint64_t>(r);
    KernelLR init = random_klr(oracle.space(), s_assumed, gamma, oracle.classes(), seed);
    FitResult fit = fit_to_targets(init, targets, cfg, true);
    if (fit.report.final_loss < best_loss) {
      best_loss = fit.report.final_loss;
      best.initial_representers = init.representers;
      best.model = std::get<KernelLR>(fit.model);
      best.report = fit.report;
    }
  }
  return best;
}

namespace {

double l1(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double nearest(const Point& x, const std::vector<Point>& pool, std::size_t* idx) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double v = l1(x, pool[i]);
    if (v < best) {
      best = v;
      if (idx) *idx = i;
    }
  }
  return best;
}

}  // namespace

LeakageReport leakage_report(const std::vector<Point>& truth, const KlrExtraction& ex) {
  if (truth.empty()) throw std::invalid_argument("leakage report needs the true representers");
  LeakageReport rep;
  const auto& got = ex.model.representers;
  double base = 0.0;
  for (const auto& t : truth) {
    std::size_t idx = 0;
    rep.nearest_l1.push_back(nearest(t, got, &idx));
    rep.nearest_index.push_back(idx);
    rep.mean_l1 += rep.nearest_l1.back();
    base += nearest(t, ex.initial_representers, nullptr);
  }
  rep.mean_l1 /= truth.size();
  rep.baseline_l1 = base / truth.size();
  for (std::size_t r = 0; r < got.size(); ++r) {
    double s = 0.0;
    for (const auto& row : ex.model.alphas) s += row[r] * row[r];
    rep.weight_norms.push_back(std::sqrt(s));
  }
  rep.underestimated = got.size() < truth.size();
  return rep;
}

}  // namespace mexlab
