#include "mexlab/harness/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mexlab/attacks/tree_extract.hpp"
#include "mexlab/core/io.hpp"
#include "mexlab/featrev/featrev.hpp"
#include "mexlab/harness/experiment.hpp"
#include "mexlab/harness/tree_corpus.hpp"
#include "mexlab/models/predict.hpp"

namespace mexlab {

namespace {

std::string num(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

ExperimentConfig base(const std::string& name, const AcceptanceOptions& opt) {
  ExperimentConfig c;
  c.name = name;
  c.threads = opt.threads;
  return c;
}

std::vector<std::uint64_t> seeds(int n) {
  std::vector<std::uint64_t> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = static_cast<std::uint64_t>(i);
  return s;
}

// Runs cfg and appends its CSV under a "# name" line.
ExperimentReport run(const ExperimentConfig& cfg, std::string& csv) {
  ExperimentReport r = run_experiment(cfg);
  csv += "# " + cfg.name + "\n" + report_csv(r);
  return r;
}

std::string first_error(const ExperimentReport& r) {
  for (const auto& c : r.cells) {
    if (c.error) return r.name + ": " + *c.error;
  }
  return {};
}

double mean_of(const ExperimentReport& r, double (*get)(const CellResult&)) {
  double s = 0.0;
  for (const auto& c : r.cells) s += get(c);
  return s / static_cast<double>(r.cells.size());
}

double agreement(const CellResult& c) { return 1.0 - c.report.r_unif; }
double unif_tv(const CellResult& c) { return c.report.r_unif_tv.value_or(1.0); }

CriterionResult fail_on_errors(CriterionResult res, const std::vector<ExperimentReport>& reps) {
  for (const auto& r : reps) {
    const std::string e = first_error(r);
    if (!e.empty()) {
      res.pass = false;
      res.detail = "cell failed: " + e;
      break;
    }
  }
  return res;
}

CriterionResult binary_lr(const AcceptanceOptions& opt) {
  CriterionResult res{1, "binary LR from d+1 queries", true, "", ""};
  std::vector<ExperimentReport> reps;
  double worst_tv = 0.0;
  std::size_t worst_q = 0;
  for (const char* ds : {"circles", "moons", "blobs"}) {
    ExperimentConfig c = base(std::string("binary_lr_") + ds, opt);
    c.dataset.name = ds;
    if (c.dataset.name == "blobs") c.dataset.centers = 2;
    c.seeds = seeds(5);
    reps.push_back(run(c, res.csv));
    for (const auto& cell : reps.back().cells) {
      if (cell.error) continue;
      const auto& r = cell.report;
      worst_tv = std::max({worst_tv, r.r_test_tv.value_or(1.0), r.r_unif_tv.value_or(1.0)});
      worst_q = std::max(worst_q, r.queries_used);
      res.pass = res.pass && r.queries_used == 3 && r.r_test == 0.0 && r.r_unif == 0.0;
    }
  }
  res.pass = res.pass && worst_tv < 1e-6;
  res.detail = "15 targets, queries " + std::to_string(worst_q) + ", max TV " + num(worst_tv) + " (< 1e-6)";
  return fail_on_errors(res, reps);
}

CriterionResult softmax_ovr(const AcceptanceOptions& opt) {
  CriterionResult res{2, "softmax/OvR with k = c(d+1) queries", true, "", ""};
  std::vector<ExperimentReport> reps;
  double worst_tv = 0.0, worst_r = 0.0;
  for (const char* kind : {"softmax", "ovr"}) {
    for (const char* ds : {"blobs", "five_class"}) {
      ExperimentConfig c = base(std::string(kind) + "_" + ds, opt);
      c.dataset.name = ds;
      c.target.kind = kind;
      c.seeds = seeds(3);
      reps.push_back(run(c, res.csv));
      const std::size_t k = c.dataset.name == "blobs" ? 9 : 105;
      for (const auto& cell : reps.back().cells) {
        if (cell.error) continue;
        worst_tv = std::max(worst_tv, unif_tv(cell));
        worst_r = std::max({worst_r, cell.report.r_unif, cell.report.r_test});
        res.pass = res.pass && cell.report.queries_used == k;
      }
    }
  }
  res.pass = res.pass && worst_r == 0.0 && worst_tv < 1e-6;
  res.detail = "12 targets, agreement " + num(100.0 * (1.0 - worst_r)) + "%, max uniform TV " + num(worst_tv) +
               " (< 1e-6)";
  return fail_on_errors(res, reps);
}

CriterionResult mlp(const AcceptanceOptions& opt) {
  CriterionResult res{3, "MLP h=20 on five_class at alpha=5", false, "", ""};
  ExperimentConfig c = base("mlp_five_class", opt);
  c.dataset.name = "five_class";
  c.target.kind = "mlp";
  c.target.hidden = 20;
  c.alphas = {5.0};
  c.seeds = seeds(3);
  const auto rep = run(c, res.csv);
  double best = 0.0;
  std::string per;
  for (const auto& cell : rep.cells) {
    if (cell.error) continue;
    const double worse = std::min(1.0 - cell.report.r_test, 1.0 - cell.report.r_unif);
    best = std::max(best, worse);
    per += (per.empty() ? "" : "/") + num(worse);
  }
  res.pass = best >= 0.995;
  res.detail = "min(1-R_test, 1-R_unif) per seed " + per + ", best " + num(best) + " (>= 0.995), " +
               std::to_string(rep.cells[0].report.queries_used) + " queries";
  // Best-of-3 tolerates a seed stuck in a local minimum, not a failed run.
  return fail_on_errors(res, {rep});
}

struct TreeRun {
  std::size_t path_q = 0, top_q = 0;
  double path_err = 1.0, top_err = 1.0;
  double bound = 0.0;
  int leaves = 0;
};

std::vector<TreeRun> corpus_runs(std::string& csv) {
  constexpr double eps = kDefaultTreeEps;
  const auto corpus = tree_corpus(20, 64, 2024, eps);
  std::vector<TreeRun> out;
  std::ostringstream rows;
  rows << "# tree_corpus\nseed,alpha,queries,r_test,r_unif,r_test_tv,r_unif_tv,ms\n";
  for (std::size_t t = 0; t < corpus.size(); ++t) {
    const auto& ct = corpus[t];
    TreeRun r;
    r.leaves = static_cast<int>(std::count_if(ct.tree.nodes.begin(), ct.tree.nodes.end(),
                                              [](const TreeNode& n) { return n.kind == SplitKind::Leaf; }));
    r.bound = path_find_bound(ct.space, r.leaves, eps);
    const Predictor f = as_predictor(ct.tree);
    for (int top = 0; top < 2; ++top) {
      ModelOracle o(ct.tree, ct.space, DisclosurePolicy::tree_service());
      TreeAttackOptions ta;
      ta.eps = eps;
      ta.seed = t;
      const ExtractedRuleSet rules = top ? top_down_find(o, ta) : path_find(o, ta);
      const RuleSetPredictor rp(rules, ct.tree.classes);
      const double err = r_unif(f, rp.as_predictor(), ct.space, kDefaultUniformSamples, 100 + t);
      (top ? r.top_q : r.path_q) = o.queries();
      (top ? r.top_err : r.path_err) = err;
      // alpha column: 0 path finding, 1 top-down.
      rows << t << ',' << top << ',' << o.queries() << ",," << format_double(err) << ",,,0\n";
    }
    out.push_back(r);
  }
  csv += rows.str();
  return out;
}

CriterionResult tree_exact(const AcceptanceOptions&) {
  CriterionResult res{4, "tree path finding is exact on unique-id trees", false, "", ""};
  const auto runs = corpus_runs(res.csv);
  int exact_path = 0, exact_top = 0;
  for (const auto& r : runs) {
    exact_path += r.path_err == 0.0;
    exact_top += r.top_err == 0.0;
  }
  res.pass = exact_path == 20 && exact_top == 20;
  res.detail = "R_unif = 0 on " + std::to_string(exact_path) + "/20 (path_find) and " +
               std::to_string(exact_top) + "/20 (top_down)";
  return res;
}

CriterionResult tree_cost(const AcceptanceOptions&) {
  CriterionResult res{5, "tree query complexity", false, "", ""};
  const auto runs = corpus_runs(res.csv);
  double worst = 0.0;
  int fewer = 0;
  for (const auto& r : runs) {
    worst = std::max({worst, r.path_q / r.bound, r.top_q / r.bound});
    fewer += r.top_q < r.path_q;
  }
  res.pass = worst <= 4.0 && fewer >= 16;
  res.detail = "max queries/bound " + num(worst) + " (<= 4), top_down cheaper on " + std::to_string(fewer) +
               "/20 (>= 16)";
  return res;
}

CriterionResult lowd_meek(const AcceptanceOptions& opt) {
  CriterionResult res{6, "Lowd-Meek on binary linear targets", true, "", ""};
  std::vector<ExperimentReport> reps;
  double worst_agree = 1.0;
  std::size_t worst_q = 0;
  for (const char* ds : {"circles", "moons", "blobs"}) {
    ExperimentConfig c = base(std::string("lowd_meek_") + ds, opt);
    c.dataset.name = ds;
    if (c.dataset.name == "blobs") c.dataset.centers = 2;
    c.oracle.outputs = "labels";
    c.attack.name = "lowd_meek";
    c.seeds = seeds(5);
    reps.push_back(run(c, res.csv));
    for (const auto& cell : reps.back().cells) {
      if (cell.error) continue;
      worst_agree = std::min(worst_agree, agreement(cell));
      worst_q = std::max(worst_q, cell.report.queries_used);
    }
  }
  res.pass = worst_agree >= 0.99 && worst_q <= 3000;
  res.detail = "15 targets, min agreement " + num(worst_agree) + " (>= 0.99), max queries " +
               std::to_string(worst_q) + " (<= 3000)";
  return fail_on_errors(res, reps);
}

CriterionResult retraining(const AcceptanceOptions& opt) {
  CriterionResult res{7, "adaptive retraining >= uniform", true, "", ""};
  struct Case {
    const char* target;
    const char* data;
    const char* surrogate;
  };
  std::vector<ExperimentReport> reps;
  for (const Case k : {Case{"binary_lr", "moons", "binary_lr"}, Case{"softmax", "blobs", "softmax"},
                       Case{"svm", "circles", "svm_rbf"}}) {
    ExperimentReport by[2];
    for (int s = 0; s < 2; ++s) {
      const char* strategy = s ? "adaptive" : "uniform";
      ExperimentConfig c = base(std::string("retrain_") + k.target + "_" + strategy, opt);
      c.dataset.name = k.data;
      c.target.kind = k.target;
      c.oracle.outputs = "labels";
      c.attack.name = "retrain";
      c.attack.surrogate = k.surrogate;
      c.attack.strategy = strategy;
      if (c.target.kind == "svm") {
        c.target.l2_lambda = 1e-3;
        c.attack.l2_lambda = 1e-3;
      }
      c.alphas = {10, 50, 100};
      c.seeds = seeds(5);
      by[s] = run(c, res.csv);
      reps.push_back(by[s]);
    }
    std::string row;
    for (std::size_t a = 0; a < 3; ++a) {
      const double u = 1.0 - by[0].aggregates[a].mean_r_unif;
      const double ad = 1.0 - by[1].aggregates[a].mean_r_unif;
      res.pass = res.pass && ad >= u;
      row += (row.empty() ? "" : " ") + num(ad) + ">=" + num(u);
    }
    res.detail += std::string(res.detail.empty() ? "" : "; ") + k.target + " " + row;
  }
  return fail_on_errors(res, reps);
}

CriterionResult rounding(const AcceptanceOptions& opt) {
  CriterionResult res{8, "rounding countermeasure", true, "", ""};
  std::vector<ExperimentReport> reps;
  struct Case {
    const char* target;
    const char* data;
  };
  for (const Case k : {Case{"binary_lr", "moons"}, Case{"softmax", "blobs"}}) {
    double acc[4], tv[4];
    const int decimals[4] = {-1, 5, 4, 2};
    for (int i = 0; i < 4; ++i) {
      ExperimentConfig c = base(std::string("rounding_") + k.target + "_" +
                                    (decimals[i] < 0 ? std::string("exact") : std::to_string(decimals[i])),
                                opt);
      c.dataset.name = k.data;
      c.target.kind = k.target;
      if (decimals[i] >= 0) c.oracle.decimals = decimals[i];
      c.seeds = seeds(5);
      reps.push_back(run(c, res.csv));
      acc[i] = mean_of(reps.back(), agreement);
      tv[i] = mean_of(reps.back(), unif_tv);
    }
    const bool ok = std::abs(acc[1] - acc[0]) < 1e-3 && std::abs(acc[2] - acc[0]) < 1e-3 && tv[3] >= 10.0 * tv[0];
    res.pass = res.pass && ok;
    res.detail += std::string(res.detail.empty() ? "" : "; ") + k.target + " agreement " + num(acc[0]) + "/" +
                  num(acc[1]) + "/" + num(acc[2]) + " (exact/5/4), TV " + num(tv[0]) + " -> " + num(tv[3]) +
                  " at 2 decimals";
  }
  return fail_on_errors(res, reps);
}

CriterionResult klr(const AcceptanceOptions& opt) {
  CriterionResult res{9, "kernel LR representer leakage", false, "", ""};
  ExperimentConfig c = base("klr_leakage_blobs", opt);
  c.dataset.name = "blobs";
  c.target.kind = "kernel_lr";
  c.target.representers = 8;
  c.attack.name = "klr_leakage";
  c.attack.representers = 8;
  c.attack.restarts = 4;
  c.alphas = {25.0};
  c.seeds = seeds(3);
  const auto rep = run(c, res.csv);
  double ratio = 0.0;
  std::string per;
  for (const auto& cell : rep.cells) {
    if (cell.error) continue;
    const double r = cell.extra.at("mean_l1").get<double>() / cell.extra.at("baseline_l1").get<double>();
    ratio += r / 3.0;
    per += (per.empty() ? "" : "/") + num(r);
  }
  res.pass = ratio <= 1.0 / 3.0;
  res.detail = "nearest-representer l1 / random baseline per seed " + per + ", mean " + num(ratio) + " (<= 0.333)";
  return fail_on_errors(res, {rep});
}

// One-hot(3) plus a 4-bin numeric input with grid-aligned boundaries, so
// recovered bins are exact and agreement can be checked everywhere.
std::string composed_target(std::uint64_t seed, std::string& csv, bool& ok) {
  Rng rng(seed);
  FeatureExtractor ex{FeatureSpace({Categorical{3}, Continuous{0.0, 1.0}}),
                      {OneHotDim{3}, QuantileBinDim{{0.25, 0.5, 0.75}}}};
  BinaryLR m;
  for (int j = 0; j < 7; ++j) m.w.push_back(rng.uniform(-2.0, 2.0));
  m.beta = rng.uniform(-1.0, 1.0);
  DisclosurePolicy p = DisclosurePolicy::probabilities();
  p.allow_partial = true;
  ModelOracle o(m, ex.input, p, as_transform(ex));
  const BinSearch bs = recover_bins(o, 1, 1e-3);
  double err = bs.boundaries.size() == 3 ? 0.0 : 1.0;
  const auto& truth = std::get<QuantileBinDim>(ex.dims[1]).boundaries;
  for (std::size_t k = 0; k < bs.boundaries.size() && k < 3; ++k) err = std::max(err, std::abs(bs.boundaries[k] - truth[k]));
  FeatureExtractor found = ex;
  found.dims[1] = QuantileBinDim{bs.boundaries};
  const auto got = extract_composed_linear(o, found, {bs});
  std::size_t disagree = 0;
  double tv = 0.0;
  const auto pts = uniform_points(ex.input, kDefaultUniformSamples, seed + 1);
  for (const Point& x : pts) {
    const Point a = apply_extractor(ex, PartialQuery::complete(x));
    const Point b = apply_extractor(found, PartialQuery::complete(x));
    disagree += predict_class(m, a) != predict_class(got.model, b);
    tv += tv_distance(predict_proba(m, a), predict_proba(got.model, b));
  }
  tv /= static_cast<double>(pts.size());
  ok = ok && err <= 1e-3 && disagree == 0;
  csv += std::to_string(seed) + ",1," + std::to_string(o.queries()) + ",," + format_double(disagree / 1e4) + ",," +
         format_double(tv) + ",0\n";
  return num(err);
}

CriterionResult feature_reversal(const AcceptanceOptions& opt) {
  CriterionResult res{10, "feature-extraction reverse engineering", true, "", ""};
  res.csv = "# composed_onehot_4bin\nseed,alpha,queries,r_test,r_unif,r_test_tv,r_unif_tv,ms\n";
  std::string errs;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const std::string e = composed_target(s, res.csv, res.pass);
    errs += (errs.empty() ? "" : "/") + e;
  }
  res.detail = "one-hot+4-bin bin error " + errs + ", uniform agreement " + (res.pass ? "100%" : "< 100%");

  std::vector<ExperimentReport> reps;
  struct Shape {
    const char* data;
    double reference;
  };
  for (const Shape sh : {Shape{"circles", 278.0}, Shape{"adult_shaped", 1485.0}}) {
    ExperimentConfig c = base(std::string("featrev_") + sh.data, opt);
    c.dataset.name = sh.data;
    c.target.bins = 10;
    c.oracle.allow_partial = true;
    c.attack.name = "featrev";
    c.seeds = seeds(3);
    reps.push_back(run(c, res.csv));
    const auto& rep = reps.back();
    double max_err = 0.0, worst_test = 0.0;
    bool counts = true;
    for (const auto& cell : rep.cells) {
      if (cell.error) continue;
      max_err = std::max(max_err, cell.extra.at("max_bin_error").get<double>());
      counts = counts && cell.extra.at("bin_counts_match").get<bool>();
      worst_test = std::max(worst_test, cell.report.r_test);
    }
    const double ratio = rep.aggregates[0].mean_queries / sh.reference;
    const bool ok = counts && max_err <= 1e-3 && worst_test == 0.0 && ratio >= 0.5 && ratio <= 2.0;
    res.pass = res.pass && ok;
    res.detail += std::string("; ") + sh.data + " bin error " + num(max_err) + ", test agreement " +
                  num(100.0 * (1.0 - worst_test)) + "%, uniform " + num(100.0 * (1.0 - rep.aggregates[0].mean_r_unif)) +
                  "%, queries " + num(rep.aggregates[0].mean_queries) + " vs " + num(sh.reference);
  }
  return fail_on_errors(res, reps);
}

CriterionResult improper(const AcceptanceOptions& opt) {
  CriterionResult res{11, "proper extraction beats a 10x-budget MLP", false, "", ""};
  ExperimentConfig proper = base("proper_softmax_five_class", opt);
  proper.dataset.name = "five_class";
  proper.target.kind = "softmax";
  proper.seeds = seeds(3);
  ExperimentConfig imp = proper;
  imp.name = "improper_mlp_five_class";
  imp.attack.name = "improper";
  imp.attack.hidden = 20;
  imp.alphas = {10.0};
  const auto a = run(proper, res.csv);
  const auto b = run(imp, res.csv);
  const double acc_p = mean_of(a, agreement), acc_i = mean_of(b, agreement);
  const double tv_p = mean_of(a, unif_tv), tv_i = mean_of(b, unif_tv);
  res.pass = acc_p > acc_i && tv_p < tv_i;
  res.detail = "agreement " + num(acc_p) + " vs " + num(acc_i) + ", TV " + num(tv_p) + " vs " + num(tv_i) + " (" +
               std::to_string(a.cells[0].report.queries_used) + " vs " +
               std::to_string(b.cells[0].report.queries_used) + " queries)";
  return fail_on_errors(res, {a, b});
}

CriterionResult measure(int id, const AcceptanceOptions& opt) {
  switch (id) {
    case 1: return binary_lr(opt);
    case 2: return softmax_ovr(opt);
    case 3: return mlp(opt);
    case 4: return tree_exact(opt);
    case 5: return tree_cost(opt);
    case 6: return lowd_meek(opt);
    case 7: return retraining(opt);
    case 8: return rounding(opt);
    case 9: return klr(opt);
    case 10: return feature_reversal(opt);
    case 11: return improper(opt);
    default: throw std::invalid_argument("no criterion " + std::to_string(id));
  }
}

CriterionResult determinism(const AcceptanceOptions& opt, const std::vector<std::string>* first) {
  CriterionResult res{12, "byte-identical CSV across runs", true, "", ""};
  int same = 0;
  for (int id = 1; id < kCriteria; ++id) {
    const std::string a = first ? (*first)[static_cast<std::size_t>(id - 1)] : measure(id, opt).csv;
    const std::string b = measure(id, opt).csv;
    if (a == b && !a.empty()) {
      ++same;
    } else {
      res.pass = false;
      res.detail += "criterion " + std::to_string(id) + " differs; ";
    }
  }
  res.detail += std::to_string(same) + "/" + std::to_string(kCriteria - 1) + " criteria reproduce byte for byte";
  return res;
}

void save_csv(const CriterionResult& r, const AcceptanceOptions& opt) {
  if (opt.out_dir.empty() || r.csv.empty()) return;
  std::filesystem::create_directories(opt.out_dir);
  std::ofstream f(std::filesystem::path(opt.out_dir) / ("criterion_" + std::to_string(r.id) + ".csv"),
                  std::ios::binary);
  f << r.csv;
}

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& opt) {
  CriterionResult r;
  try {
    r = id == kCriteria ? determinism(opt, nullptr) : measure(id, opt);
  } catch (const std::exception& e) {
    r.id = id;
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
  }
  save_csv(r, opt);
  return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> out;
  std::vector<std::string> csvs;
  for (int id = 1; id <= kCriteria; ++id) {
    CriterionResult r;
    try {
      r = id == kCriteria ? determinism(opt, &csvs) : measure(id, opt);
    } catch (const std::exception& e) {
      r.id = id;
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    save_csv(r, opt);
    if (id < kCriteria) csvs.push_back(r.csv);
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  return std::string(r.pass ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.title + ": " + r.detail;
}

}  // namespace mexlab
