#include "mexlab/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mexlab/attacks/boundary.hpp"
#include "mexlab/attacks/eqsolve.hpp"
#include "mexlab/attacks/tree_extract.hpp"
#include "mexlab/core/io.hpp"
#include "mexlab/harness/synthetic.hpp"
#include "mexlab/harness/tree_corpus.hpp"
#include "mexlab/improper/improper.hpp"
#include "mexlab/models/predict.hpp"
#include "mexlab/training/logistic.hpp"
#include "mexlab/training/svm.hpp"
#include "mexlab/training/tree.hpp"

namespace mexlab {

using nlohmann::json;

namespace {

const std::set<std::string> kTargets{"binary_lr", "softmax", "ovr", "mlp", "kernel_lr",
                                     "svm", "tree", "random_tree"};
const std::set<std::string> kAttacks{"eqsolve", "klr_leakage", "path_find", "top_down",
                                     "lowd_meek", "retrain", "improper", "featrev"};
const std::set<std::string> kLogistic{"binary_lr", "softmax", "ovr", "mlp", "kernel_lr"};

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("config: " + msg);
}

Kernel kernel_from(const TargetConfig& t) {
  if (t.kernel == "linear") return LinearKernel{};
  if (t.kernel == "poly") return PolyKernel{t.degree};
  if (t.kernel == "rbf") return RbfKernel{t.gamma};
  throw std::invalid_argument("config: unknown kernel " + t.kernel);
}

SurrogateSpec surrogate_from(const std::string& name, const AttackConfig& a, double gamma) {
  if (name == "svm_rbf") return SurrogateSpec::svm(RbfKernel{gamma});
  if (name == "svm_linear") return SurrogateSpec::svm(LinearKernel{});
  FamilyOptions o;
  o.hidden = a.hidden;
  o.representers = a.representers;
  o.gamma = gamma;
  return SurrogateSpec::logistic(family_from_name(name), o);
}

FamilyOptions family_options(const TargetConfig& t) {
  FamilyOptions o;
  o.hidden = t.hidden;
  o.representers = t.representers;
  o.gamma = t.gamma;
  return o;
}

FeatureExtractor fit_extractor(const Dataset& data, int bins) {
  FeatureExtractor ex{data.space, {}};
  for (std::size_t i = 0; i < data.space.size(); ++i) {
    if (!data.space.is_continuous(i)) {
      ex.dims.push_back(OneHotDim{data.space.arity(i)});
      continue;
    }
    std::vector<double> v;
    for (auto idx : data.train) v.push_back(data.rows[idx].x[i]);
    ex.dims.push_back(QuantileBinDim{fit_quantile_bins(std::move(v), bins)});
  }
  ex.validate();
  return ex;
}

Predictor through(const FeatureExtractor& ex, const ModelSpec& m) {
  Predictor p;
  p.label = [ex, m](const Point& x) { return predict_class(m, apply_extractor(ex, PartialQuery::complete(x))); };
  if (supports_proba(m)) {
    p.proba = [ex, m](const Point& x) { return predict_proba(m, apply_extractor(ex, PartialQuery::complete(x))); };
  }
  return p;
}

Predictor labels_of(Predictor p) {
  p.proba = nullptr;
  return p;
}

}  // namespace

DisclosurePolicy OracleConfig::policy() const {
  DisclosurePolicy p;
  if (outputs == "labels") {
    p.outputs = OutputKind::LabelsOnly;
  } else if (outputs == "probabilities") {
    p.outputs = OutputKind::Probabilities;
  } else {
    throw std::invalid_argument("config: oracle.outputs must be probabilities or labels");
  }
  p.decimals = decimals;
  p.allow_partial = allow_partial;
  p.reveal_fields = reveal_fields;
  p.validate();
  return p;
}

void ExperimentConfig::validate() const {
  require(!seeds.empty(), "seeds must not be empty");
  require(!alphas.empty(), "alphas must not be empty");
  for (double a : alphas) require(a > 0 && std::isfinite(a), "alphas must be positive");
  require(threads >= 1, "threads must be at least 1");
  require(kTargets.count(target.kind) == 1, "unknown target.kind " + target.kind);
  require(kAttacks.count(attack.name) == 1, "unknown attack.name " + attack.name);
  require(dataset.train_fraction > 0 && dataset.train_fraction < 1, "dataset.train_fraction must be in (0, 1)");
  require(target.bins >= 0, "target.bins must be non-negative");
  require(attack.eps > 0, "attack.eps must be positive");
  require(attack.rounds >= 1, "attack.rounds must be positive");
  require(attack.restarts >= 1, "attack.restarts must be positive");
  require(attack.uniform_samples >= 1, "attack.uniform_samples must be positive");
  const DisclosurePolicy p = oracle.policy();
  if (target.kind == "svm") kernel_from(target);

  const std::string& a = attack.name;
  const bool probs = p.outputs == OutputKind::Probabilities;
  if (a == "eqsolve" || a == "klr_leakage" || a == "improper" || a == "featrev") {
    require(probs, a + " needs oracle.outputs = probabilities");
    require(kLogistic.count(target.kind) == 1, a + " needs a logistic-family target");
  }
  if (a == "klr_leakage") require(target.kind == "kernel_lr", "klr_leakage needs a kernel_lr target");
  if (a == "featrev") {
    require(target.bins > 0, "featrev needs target.bins > 0");
    require(target.kind == "binary_lr" || target.kind == "softmax", "featrev needs a binary_lr or softmax target");
  }
  if (a == "path_find" || a == "top_down") {
    require(target.kind == "tree" || target.kind == "random_tree", a + " needs a tree target");
    require(probs, a + " needs oracle.outputs = probabilities");
  }
  if (a == "top_down") require(p.allow_partial, "top_down needs oracle.allow_partial");
  if (a == "retrain") {
    require(!attack.surrogate.empty(), "retrain needs attack.surrogate");
    strategy_from_name(attack.strategy);
    if (attack.surrogate.rfind("svm_", 0) != 0) family_from_name(attack.surrogate);
  }
  if (a == "lowd_meek") require(attack.degree >= 1, "attack.degree must be positive");
}

Dataset make_dataset(const DatasetConfig& cfg, std::uint64_t seed) {
  if (cfg.name == "adult_shaped") return adult_shaped(cfg.n ? cfg.n : 10000, seed);
  if (cfg.name.size() > 4 && cfg.name.substr(cfg.name.size() - 4) == ".csv") {
    Dataset d = load_dataset(cfg.name);
    d.split(cfg.train_fraction, seed);
    return d;
  }
  SyntheticOptions opt;
  opt.noise = cfg.noise;
  opt.centers = cfg.centers;
  opt.train_fraction = cfg.train_fraction;
  return gen_synthetic(cfg.name, cfg.n ? cfg.n : default_size(cfg.name), seed, opt);
}

Predictor PreparedTarget::predictor() const {
  return extractor ? through(*extractor, model) : as_predictor(model);
}

std::unique_ptr<ModelOracle> PreparedTarget::oracle(const DisclosurePolicy& policy) const {
  InputTransform t;
  if (extractor) t = as_transform(*extractor);
  return std::make_unique<ModelOracle>(model, data.space, policy, t);
}

PreparedTarget prepare_target(const ExperimentConfig& cfg, std::uint64_t seed) {
  const TargetConfig& t = cfg.target;
  PreparedTarget out;
  if (t.kind == "random_tree") {
    out.has_data = false;
    out.data.space = corpus_space();
    out.data.classes = 2;
    TreeGenOptions g;
    g.leaves = t.leaves;
    g.eps = cfg.attack.eps;
    out.model = random_tree(out.data.space, g, seed);
    return out;
  }
  out.data = make_dataset(cfg.dataset, seed);
  Dataset train = out.data;
  if (t.bins > 0) {
    out.extractor = fit_extractor(out.data, t.bins);
    train.space = out.extractor->output_space();
    for (auto& r : train.rows) r.x = apply_extractor(*out.extractor, PartialQuery::complete(r.x));
  }
  OptimizerConfig oc;
  oc.seed = seed;
  oc.l2_lambda = t.l2_lambda;
  oc.max_epochs = t.max_epochs;
  if (t.kind == "tree") {
    out.model = fit_tree(train, {t.max_depth, 1});
  } else if (t.kind == "svm") {
    out.model = fit_svm(kernel_from(t), train, oc);
  } else {
    out.model = fit_logistic_family(family_from_name(t.kind), train, oc, family_options(t)).model;
  }
  return out;
}

CellResult run_cell(const ExperimentConfig& cfg, const PreparedTarget& target, std::uint64_t seed,
                    double alpha) {
  const auto t0 = std::chrono::steady_clock::now();
  const AttackConfig& a = cfg.attack;
  const DisclosurePolicy policy = cfg.oracle.policy();
  auto oracle = target.oracle(policy);
  const FeatureSpace& space = target.input_space();
  const std::size_t d = space.size();
  const int c = target.classes();

  CellResult out;
  Predictor fhat;
  if (a.name == "eqsolve") {
    const FamilyKind kind = family_from_name(cfg.target.kind);
    if (kind == FamilyKind::BinaryLR) {
      BinaryLrInfo info;
      fhat = as_predictor(extract_binary_lr(*oracle, seed, &info));
      out.extra["retries"] = info.retries;
      out.extra["approximate"] = info.approximate;
    } else {
      const FamilyOptions fam = family_options(cfg.target);
      const BudgetSpec b{alpha, family_unknowns(kind, d, c, fam)};
      fhat = as_predictor(extract_by_loss_min(kind, *oracle, b, extraction_config(kind, seed), fam).model);
    }
  } else if (a.name == "klr_leakage") {
    FamilyOptions fam = family_options(cfg.target);
    fam.representers = a.representers;
    const BudgetSpec b{alpha, family_unknowns(FamilyKind::KernelLR, d, c, fam)};
    const auto ex = extract_klr_representers(*oracle, static_cast<std::size_t>(a.representers),
                                             cfg.target.gamma, b,
                                             extraction_config(FamilyKind::KernelLR, seed), a.restarts);
    const auto leak = leakage_report(std::get<KernelLR>(target.model).representers, ex);
    out.extra["mean_l1"] = leak.mean_l1;
    out.extra["baseline_l1"] = leak.baseline_l1;
    out.extra["underestimated"] = leak.underestimated;
    fhat = as_predictor(ex.model);
  } else if (a.name == "path_find" || a.name == "top_down") {
    TreeAttackOptions opt;
    opt.eps = a.eps;
    opt.seed = seed;
    ExtractedRuleSet rules = a.name == "path_find" ? path_find(*oracle, opt) : top_down_find(*oracle, opt);
    const auto& tree = std::get<DecisionTree>(target.model);
    const int leaves = static_cast<int>(std::count_if(tree.nodes.begin(), tree.nodes.end(),
                                                      [](const TreeNode& n) { return n.kind == SplitKind::Leaf; }));
    out.extra["leaves"] = leaves;
    out.extra["rules"] = rules.leaves.size();
    out.extra["bound"] = path_find_bound(space, leaves, a.eps);
    out.extra["fell_back"] = rules.fell_back;
    fhat = RuleSetPredictor(std::move(rules), c).as_predictor();
  } else if (a.name == "lowd_meek") {
    LowdMeekOptions opt;
    opt.seed = seed;
    if (a.degree == 1) {
      fhat = labels_of(as_predictor(lowd_meek(*oracle, opt)));
    } else {
      fhat = lowd_meek_poly(*oracle, a.degree, opt).as_predictor();
    }
  } else if (a.name == "retrain") {
    RetrainConfig rc;
    rc.strategy = strategy_from_name(a.strategy);
    rc.budget = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(parameter_count(target.model))));
    rc.rounds = a.rounds;
    rc.surrogate = surrogate_from(a.surrogate, a, cfg.target.gamma);
    rc.cfg.seed = seed;
    rc.cfg.l2_lambda = a.l2_lambda;
    const RetrainResult res = retrain(*oracle, rc, seed);
    fhat = labels_of(as_predictor(res.model));
  } else if (a.name == "improper") {
    const BudgetSpec b{alpha, parameter_count(target.model)};
    const auto imp = improper_extract(*oracle, a.hidden, b, extraction_config(FamilyKind::MLP, seed));
    out.extra["param_ratio"] = imp.param_ratio;
    fhat = as_predictor(ModelSpec(imp.model));
  } else if (a.name == "featrev") {
    const FeatureExtractor& truth = *target.extractor;
    FeatureExtractor found = truth;
    std::vector<BinSearch> searches;
    double max_err = 0.0;
    bool counts_match = true;
    for (std::size_t i = 0; i < truth.dims.size(); ++i) {
      const auto* qb = std::get_if<QuantileBinDim>(&truth.dims[i]);
      if (!qb) continue;
      searches.push_back(recover_bins(*oracle, i, a.eps));
      const auto& got = searches.back().boundaries;
      std::get<QuantileBinDim>(found.dims[i]).boundaries = got;
      if (got.size() != qb->boundaries.size()) {
        counts_match = false;
        continue;
      }
      for (std::size_t k = 0; k < got.size(); ++k) max_err = std::max(max_err, std::abs(got[k] - qb->boundaries[k]));
    }
    const std::size_t bin_queries = oracle->queries();
    const auto ex = extract_composed_linear(*oracle, found, searches, seed);
    out.extra["bin_queries"] = bin_queries;
    out.extra["reused"] = ex.reused;
    out.extra["max_bin_error"] = max_err;
    out.extra["bin_counts_match"] = counts_match;
    fhat = through(found, ex.model);
  }

  ExtractionReport& r = out.report;
  r.kind = a.name;
  r.alpha = alpha;
  r.seed = seed;
  r.queries_used = oracle->queries();
  Predictor f = target.predictor();
  if (policy.outputs == OutputKind::LabelsOnly) f = labels_of(std::move(f));
  score_extraction(r, f, fhat, target.has_data ? &target.data : nullptr, space, a.uniform_samples,
                   seed + 1);
  if (cfg.output.record_timing) {
    r.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport rep;
  rep.name = cfg.name;
  const std::size_t na = cfg.alphas.size();
  const std::size_t ncells = cfg.seeds.size() * na;
  rep.cells.resize(ncells);

  // Targets are trained once per seed; a failed training fails its cells.
  std::vector<std::optional<PreparedTarget>> targets(cfg.seeds.size());
  std::vector<std::string> target_errors(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  auto pool = [&](std::size_t jobs, const std::function<void(std::size_t)>& job) {
    next = 0;
    auto worker = [&] {
      for (std::size_t j; (j = next++) < jobs;) job(j);
    };
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), jobs);
    std::vector<std::thread> ts;
    for (std::size_t i = 1; i < n; ++i) ts.emplace_back(worker);
    worker();
    for (auto& t : ts) t.join();
  };

  pool(cfg.seeds.size(), [&](std::size_t s) {
    try {
      targets[s] = prepare_target(cfg, cfg.seeds[s]);
    } catch (const std::exception& e) {
      target_errors[s] = std::string("target: ") + e.what();
    }
  });
  pool(ncells, [&](std::size_t j) {
    const std::size_t s = j / na;
    const double alpha = cfg.alphas[j % na];
    CellResult& cell = rep.cells[j];
    if (!targets[s]) {
      cell.error = target_errors[s];
    } else {
      try {
        cell = run_cell(cfg, *targets[s], cfg.seeds[s], alpha);
      } catch (const std::exception& e) {
        cell = CellResult{};
        cell.error = e.what();
      }
    }
    cell.report.kind = cfg.attack.name;
    cell.report.seed = cfg.seeds[s];
    cell.report.alpha = alpha;
  });

  for (std::size_t ai = 0; ai < na; ++ai) {
    Aggregate g;
    g.alpha = cfg.alphas[ai];
    std::vector<double> rt, ru;
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
      const CellResult& cell = rep.cells[s * na + ai];
      if (cell.error) continue;
      ++g.cells;
      g.mean_queries += static_cast<double>(cell.report.queries_used);
      rt.push_back(cell.report.r_test);
      ru.push_back(cell.report.r_unif);
    }
    auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
      if (v.empty()) return;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      for (double x : v) sd += (x - mean) * (x - mean);
      sd = std::sqrt(sd / static_cast<double>(v.size()));
    };
    if (g.cells) g.mean_queries /= static_cast<double>(g.cells);
    stats(rt, g.mean_r_test, g.std_r_test);
    stats(ru, g.mean_r_unif, g.std_r_unif);
    rep.aggregates.push_back(g);
  }
  return rep;
}

std::string report_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "seed,alpha,queries,r_test,r_unif,r_test_tv,r_unif_tv,ms\n";
  for (const auto& c : r.cells) {
    const ExtractionReport& e = c.report;
    out << e.seed << ',' << format_double(e.alpha) << ',';
    if (c.error) {
      // Failed cells keep their place with empty measurements.
      out << ",,,,,\n";
      continue;
    }
    out << e.queries_used << ',' << format_double(e.r_test) << ',' << format_double(e.r_unif) << ',';
    if (e.r_test_tv) out << format_double(*e.r_test_tv);
    out << ',';
    if (e.r_unif_tv) out << format_double(*e.r_unif_tv);
    out << ',' << format_double(e.wall_time_ms) << '\n';
  }
  return out.str();
}

json report_json(const ExperimentReport& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    json j = report_to_json(c.report);
    j["error"] = c.error ? json(*c.error) : json(nullptr);
    j["extra"] = c.extra;
    cells.push_back(std::move(j));
  }
  json aggs = json::array();
  for (const auto& g : r.aggregates) {
    aggs.push_back({{"alpha", g.alpha},
                    {"cells", g.cells},
                    {"mean_queries", g.mean_queries},
                    {"mean_r_test", g.mean_r_test},
                    {"std_r_test", g.std_r_test},
                    {"mean_r_unif", g.mean_r_unif},
                    {"std_r_unif", g.std_r_unif}});
  }
  return {{"name", r.name}, {"cells", std::move(cells)}, {"aggregates", std::move(aggs)}};
}

ExperimentReport report_from_json_doc(const json& j) {
  ExperimentReport r;
  r.name = j.at("name").get<std::string>();
  for (const auto& c : j.at("cells")) {
    CellResult cell;
    cell.report = report_from_json(c);
    if (!c.at("error").is_null()) cell.error = c.at("error").get<std::string>();
    cell.extra = c.at("extra");
    r.cells.push_back(std::move(cell));
  }
  for (const auto& a : j.at("aggregates")) {
    Aggregate g;
    g.alpha = a.at("alpha").get<double>();
    g.cells = a.at("cells").get<std::size_t>();
    g.mean_queries = a.at("mean_queries").get<double>();
    g.mean_r_test = a.at("mean_r_test").get<double>();
    g.std_r_test = a.at("std_r_test").get<double>();
    g.mean_r_unif = a.at("mean_r_unif").get<double>();
    g.std_r_unif = a.at("std_r_unif").get<double>();
    r.aggregates.push_back(g);
  }
  return r;
}

void emit_report(const ExperimentReport& r, const OutputConfig& out) {
  auto write = [](const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path);
  };
  if (!out.csv.empty()) write(out.csv, report_csv(r));
  if (!out.json.empty()) write(out.json, report_json(r).dump(2) + "\n");
}

}  // namespace mexlab
