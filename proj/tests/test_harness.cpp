#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "mexlab/harness/experiment.hpp"
#include "mexlab/harness/synthetic.hpp"
#include "mexlab/models/predict.hpp"
#include "mexlab/training/svm.hpp"

using namespace mexlab;

namespace {

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("synthetic shapes") {
  const Dataset c = gen_synthetic("circles", 5000, 1);
  CHECK(c.rows.size() == 5000);
  CHECK(c.classes == 2);
  CHECK(c.space.size() == 2);
  const Dataset f = gen_synthetic("five_class", default_size("five_class"), 1);
  CHECK(f.rows.size() == 1000);
  CHECK(f.classes == 5);
  CHECK(f.space.size() == 20);
  CHECK(gen_synthetic("blobs", 5000, 1).classes == 3);
  CHECK(default_size("moons") == 5000);
  for (const auto* name : {"circles", "moons", "blobs", "five_class"}) {
    const Dataset d = gen_synthetic(name, 300, 2);
    for (const auto& r : d.rows) {
      for (double v : r.x) CHECK((v >= -1.0 && v <= 1.0));
    }
  }
}

TEST_CASE("ten moons still hold both classes") {
  const Dataset d = gen_synthetic("moons", 10, 3);
  CHECK(d.rows.size() == 10);
  const auto counts = d.class_counts();
  CHECK(counts[0] > 0);
  CHECK(counts[1] > 0);
}

TEST_CASE("noise-free blobs are linearly separable") {
  SyntheticOptions opt;
  opt.noise = 0.0;
  opt.centers = 2;
  const Dataset d = gen_synthetic("blobs", 400, 4, opt);
  OptimizerConfig cfg;
  cfg.l2_lambda = 1e-6;
  cfg.max_epochs = 3000;
  const SVM s = fit_svm(LinearKernel{}, d, cfg);
  std::size_t right = 0;
  for (auto i : d.train) right += predict_class(s, d.rows[i].x) == d.rows[i].y;
  CHECK(right == d.train.size());
}

TEST_CASE("generators are deterministic per seed") {
  const Dataset a = gen_synthetic("moons", 200, 9), b = gen_synthetic("moons", 200, 9);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].x == b.rows[i].x);
  CHECK(a.train == b.train);
  CHECK_THROWS_AS(gen_synthetic("spirals", 100, 0), std::invalid_argument);
  CHECK_THROWS_AS(gen_synthetic("moons", 5, 0), std::invalid_argument);
}

TEST_CASE("config parsing") {
  const auto cfg = parse_config(R"(
name = "sweep"
alphas = [0.5, 1, 2]
seeds = [1, 2]
threads = 2

[dataset]
name = "moons"
n = 500

[target]
kind = "softmax"

[oracle]
decimals = 4

[attack]
name = "eqsolve"

[output]
csv = "out/sweep.csv"
)");
  CHECK(cfg.name == "sweep");
  CHECK(cfg.alphas == std::vector<double>{0.5, 1.0, 2.0});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(cfg.threads == 2);
  CHECK(cfg.dataset.n == 500);
  CHECK(cfg.oracle.decimals == 4);
  CHECK(cfg.output.csv == "out/sweep.csv");
  CHECK_FALSE(cfg.output.record_timing);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("seeds = []"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("alphas = [0]"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("sedes = [1]"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[target]\nkind = \"forest\""), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[dataset]\nn = \"many\""), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("name = "), std::invalid_argument);
  // Equation solving is meaningless against a label-only API.
  CHECK_THROWS_AS(parse_config("[oracle]\noutputs = \"labels\""), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[attack]\nname = \"top_down\"\n[target]\nkind = \"random_tree\""),
                  std::invalid_argument);
}

TEST_CASE("binary LR cell over circles") {
  ExperimentConfig cfg;
  cfg.dataset.name = "circles";
  cfg.dataset.n = 500;
  const auto rep = run_experiment(cfg);
  REQUIRE(rep.cells.size() == 1);
  const auto& c = rep.cells[0];
  CHECK_FALSE(c.error);
  CHECK(c.report.queries_used == 3);
  CHECK(c.report.r_unif == 0.0);
  CHECK(c.report.r_test == 0.0);
  CHECK(count_lines(report_csv(rep)) == 2);
}

TEST_CASE("path finding on a generated tree") {
  ExperimentConfig cfg;
  cfg.target.kind = "random_tree";
  cfg.attack.name = "path_find";
  cfg.oracle.allow_partial = true;
  cfg.oracle.reveal_fields = true;
  const auto rep = run_experiment(cfg);
  REQUIRE_FALSE(rep.cells[0].error);
  CHECK(rep.cells[0].report.r_unif == 0.0);
  CHECK(rep.cells[0].extra.at("leaves").get<int>() == 16);
}

TEST_CASE("a 5 x 3 sweep writes 16 lines in a fixed order") {
  ExperimentConfig cfg;
  cfg.dataset.name = "blobs";
  cfg.dataset.n = 300;
  cfg.target.kind = "softmax";
  cfg.alphas = {0.5, 1, 2, 5, 10};
  cfg.seeds = {3, 1, 2};
  cfg.attack.uniform_samples = 500;
  const auto one = run_experiment(cfg);
  cfg.threads = 4;
  const auto four = run_experiment(cfg);
  const std::string csv = report_csv(one);
  CHECK(count_lines(csv) == 16);
  CHECK(csv == report_csv(four));
  CHECK(one == four);
  CHECK(one.cells[0].report.seed == 3);
  CHECK(one.cells[1].report.alpha == 1.0);
  CHECK(one.cells[5].report.seed == 1);
  REQUIRE(one.aggregates.size() == 5);
  CHECK(one.aggregates[4].cells == 3);
  CHECK(one.aggregates[4].mean_queries == 90.0);
  CHECK(csv.substr(0, csv.find('\n')) == "seed,alpha,queries,r_test,r_unif,r_test_tv,r_unif_tv,ms");
}

TEST_CASE("failed cells are recorded and the run goes on") {
  ExperimentConfig cfg;
  cfg.dataset.name = "circles";
  cfg.dataset.n = 300;
  cfg.target.kind = "random_tree";
  cfg.attack.name = "lowd_meek";  // a tree over mixed features has categorical inputs
  cfg.oracle.outputs = "labels";
  cfg.seeds = {0, 1};
  const auto rep = run_experiment(cfg);
  REQUIRE(rep.cells.size() == 2);
  CHECK(rep.cells[0].error);
  CHECK(rep.cells[1].error);
  CHECK(rep.aggregates[0].cells == 0);
  const std::string csv = report_csv(rep);
  CHECK(csv.find("\n0,1,,,,,,\n") != std::string::npos);
}

TEST_CASE("report JSON round trip and files") {
  ExperimentConfig cfg;
  cfg.dataset.n = 300;
  cfg.seeds = {0, 1};
  cfg.alphas = {1, 2};
  const auto rep = run_experiment(cfg);
  CHECK(report_from_json_doc(report_json(rep)) == rep);

  const auto dir = std::filesystem::temp_directory_path() / "mexlab_harness_test";
  std::filesystem::remove_all(dir);
  OutputConfig out;
  out.csv = (dir / "r.csv").string();
  out.json = (dir / "r.json").string();
  emit_report(rep, out);
  std::ifstream in(out.csv);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == report_csv(rep));
  std::filesystem::remove_all(dir);
}

TEST_CASE("featurised target through the harness") {
  ExperimentConfig cfg;
  cfg.dataset.name = "circles";
  cfg.dataset.n = 1000;
  cfg.target.bins = 4;
  cfg.oracle.allow_partial = true;
  cfg.attack.name = "featrev";
  const auto rep = run_experiment(cfg);
  REQUIRE_FALSE(rep.cells[0].error);
  const auto& c = rep.cells[0];
  CHECK(c.extra.at("bin_counts_match").get<bool>());
  CHECK(c.extra.at("max_bin_error").get<double>() <= 1e-3);
  CHECK(c.report.r_test == 0.0);
}
