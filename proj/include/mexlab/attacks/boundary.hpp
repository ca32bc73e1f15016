#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mexlab/attacks/report.hpp"
#include "mexlab/oracle/oracle.hpp"
#include "mexlab/training/logistic.hpp"

namespace mexlab {

struct LowdMeekOptions {
  double eps = 1e-9;              // bisection precision along each segment
  std::size_t max_probes = 1000;  // random probes to find both classes
  std::size_t extra_points = 0;   // boundary points beyond the minimum
  std::size_t max_dim = 500;      // cap on the expanded dimension
  std::uint64_t seed = 0;
};

/// A linear classifier in the degree-p polynomial feature space of X:
/// class 1 iff w . phi(x) >= 0, where phi(x)[0] = 1 carries the bias.
struct PolyBoundary {
  int degree = 1;
  std::vector<double> w;  // unit norm

  double score(const Point& x) const;
  int label(const Point& x) const { return score(x) >= 0.0 ? 1 : 0; }
  Predictor as_predictor() const;
};

// Hyperplane of a binary linear target from labels only, returned with
// ||w|| = 1 and oriented so the probed positive point scores positive.
BinaryLR lowd_meek(QueryOracle& oracle, const LowdMeekOptions& opt = {});

// Same search, with the boundary equations formed over poly_feature_map(x).
// When the boundary points leave several candidate polynomials, the one with
// the least weight on higher-degree monomials is returned.
PolyBoundary lowd_meek_poly(QueryOracle& oracle, int degree, const LowdMeekOptions& opt = {});

/// Surrogate used by the retraining attacks.
struct SurrogateSpec {
  enum class Kind { Logistic, Svm };
  Kind kind = Kind::Logistic;
  FamilyKind family = FamilyKind::Softmax;
  FamilyOptions options;
  Kernel kernel = RbfKernel{};

  static SurrogateSpec logistic(FamilyKind f, FamilyOptions o = {}) {
    return {Kind::Logistic, f, o, RbfKernel{}};
  }
  static SurrogateSpec svm(Kernel k) { return {Kind::Svm, FamilyKind::BinaryLR, {}, k}; }
};

// Fits the surrogate to labelled points (labels must cover two classes).
ModelSpec fit_surrogate(const SurrogateSpec& s, const FeatureSpace& space, int classes,
                        const std::vector<LabeledPoint>& rows, const OptimizerConfig& cfg);

// Surrogate uncertainty at x: |p1 - 1/2| for two-class logistic models, the
// gap between the two largest probabilities otherwise, |decision| for SVMs.
double margin(const ModelSpec& m, const Point& x);

enum class RetrainStrategy { Uniform, LineSearch, Adaptive };
const char* strategy_name(RetrainStrategy s);
RetrainStrategy strategy_from_name(const std::string& name);

struct RetrainConfig {
  RetrainStrategy strategy = RetrainStrategy::Adaptive;
  std::size_t budget = 0;
  int rounds = 5;                  // Adaptive only
  int line_search_steps = 10;      // bisection steps per LineSearch pair
  std::size_t pool_factor = 50;    // Adaptive candidate pool = pool_factor * batch
  SurrogateSpec surrogate;
  OptimizerConfig cfg;

  void validate() const;
};

struct RoundStats {
  int round = 0;
  std::size_t queries = 0;
  double r_test = 0.0;
  double r_unif = 0.0;
};

// Scores an intermediate surrogate; returns (r_test, r_unif).
using RoundEvaluator = std::function<std::pair<double, double>(const ModelSpec&)>;

struct RetrainResult {
  ModelSpec model;
  std::vector<RoundStats> curve;  // filled when an evaluator is given
  std::vector<LabeledPoint> sample;
};

// Label-only retraining. Spends exactly rc.budget queries.
RetrainResult retrain(QueryOracle& oracle, const RetrainConfig& rc, std::uint64_t seed,
                      const RoundEvaluator& eval = {});

// (round, queries, r_test, r_unif) rows with a header.
std::string round_curve_csv(const std::vector<RoundStats>& curve);

/// One hypothesis tried by extract-and-test.
struct Candidate {
  std::string name;
  std::function<ModelSpec(const std::vector<LabeledPoint>&)> fit;
};

struct ScoreEntry {
  std::string name;
  double probe_disagreement = 0.0;
};

struct ExtractAndTestResult {
  ModelSpec best;
  std::string best_name;
  std::vector<ScoreEntry> scoreboard;
};

// Queries one shared uniform sample and one shared probe set, fits every
// candidate on the sample and keeps the one that disagrees least with the
// probe labels. Costs exactly sample_size + probe_size queries.
ExtractAndTestResult extract_and_test(QueryOracle& oracle, const std::vector<Candidate>& candidates,
                                      std::size_t sample_size, std::size_t probe_size,
                                      std::uint64_t seed);

}  // namespace mexlab
