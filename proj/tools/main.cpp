#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "mexlab/core/io.hpp"
#include "mexlab/featrev/featrev.hpp"
#include "mexlab/harness/acceptance.hpp"
#include "mexlab/harness/experiment.hpp"
#include "mexlab/models/serialize.hpp"
#include "mexlab/oracle/oracle.hpp"

using namespace mexlab;
using nlohmann::json;

namespace {

ExperimentConfig config_or_default(const std::string& path, std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg = path.empty() ? ExperimentConfig{} : load_config(path);
  if (seed) cfg.seeds = {*seed};
  return cfg;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// A trained target: model, input schema and optional featurisation.
json target_bundle(const PreparedTarget& t) {
  json j{{"model", model_to_json(t.model)}, {"schema", schema_to_json(t.input_space(), t.classes())}};
  if (t.extractor) j["extractor"] = extractor_to_json(*t.extractor);
  return j;
}

std::string summary(const ExperimentReport& r) {
  std::ostringstream out;
  out << r.name << '\n';
  for (const auto& g : r.aggregates) {
    out << "alpha " << format_double(g.alpha) << ": " << g.cells << " cells, mean queries "
        << format_double(g.mean_queries) << ", R_test " << format_double(g.mean_r_test) << " +- "
        << format_double(g.std_r_test) << ", R_unif " << format_double(g.mean_r_unif) << " +- "
        << format_double(g.std_r_unif) << '\n';
  }
  for (const auto& c : r.cells) {
    if (c.error) out << "seed " << c.report.seed << " alpha " << format_double(c.report.alpha) << " failed: " << *c.error << '\n';
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-extraction experiments against prediction APIs"};
  app.require_subcommand(1);

  std::string config, out, in_path, target_path, replay_path, record_path, format = "summary";
  std::optional<std::uint64_t> seed;

  auto* gen = app.add_subcommand("gen-data", "Write the configured dataset as CSV plus schema");
  gen->add_option("--config", config, "TOML experiment config");
  gen->add_option("--seed", seed, "Generator seed (default: first configured seed)");
  gen->add_option("--out", out, "Output CSV path")->required();

  auto* train = app.add_subcommand("train", "Train the configured target and save it as JSON");
  train->add_option("--config", config, "TOML experiment config");
  train->add_option("--seed", seed, "Training seed");
  train->add_option("--out", out, "Output target JSON")->required();

  auto* serve = app.add_subcommand("serve-oracle", "Answer JSONL queries from a saved target or a transcript");
  serve->add_option("--config", config, "TOML config; its [oracle] table sets the disclosure policy");
  serve->add_option("--target", target_path, "Target JSON written by train");
  serve->add_option("--replay", replay_path, "Answer from a recorded transcript instead");
  serve->add_option("--in", in_path, "Queries, one JSON array per line (null = missing); default stdin");
  serve->add_option("--out", out, "Responses as JSONL; default stdout");
  serve->add_option("--record", record_path, "Append every query and response to this transcript");

  auto* attack = app.add_subcommand("attack", "Run the configured experiment over all (seed, alpha) cells");
  attack->add_option("--config", config, "TOML experiment config")->required();
  attack->add_option("--seed", seed, "Run a single seed");
  attack->add_option("--out", out, "Output stem: writes <stem>.csv and <stem>.json");

  auto* report = app.add_subcommand("report", "Print a saved JSON report");
  report->add_option("--in", in_path, "Report JSON written by attack")->required();
  report->add_option("--format", format, "summary | csv | json")->check(CLI::IsMember({"summary", "csv", "json"}));
  report->add_option("--out", out, "Output file; default stdout");

  auto* repro = app.add_subcommand("repro", "Run the acceptance suite, one line per criterion");
  repro->add_option("--out", out, "Directory for per-criterion CSV files");
  repro->add_option("--seed", seed, "Unused; runs are seeded per criterion");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const ExperimentConfig cfg = config_or_default(config, seed);
      save_dataset(make_dataset(cfg.dataset, cfg.seeds.front()), out);
      std::cerr << "wrote " << out << " and " << schema_path_for(out).string() << '\n';
    } else if (*train) {
      const ExperimentConfig cfg = config_or_default(config, seed);
      write_text(out, target_bundle(prepare_target(cfg, cfg.seeds.front())).dump(2) + "\n");
    } else if (*serve) {
      if (target_path.empty() == replay_path.empty()) {
        throw std::invalid_argument("give exactly one of --target and --replay");
      }
      const ExperimentConfig cfg = config_or_default(config, seed);
      const DisclosurePolicy policy = cfg.oracle.policy();
      std::unique_ptr<QueryOracle> oracle;
      FeatureSpace space;
      if (!target_path.empty()) {
        const json t = read_json(target_path);
        space = space_from_json(t.at("schema"));
        InputTransform tf;
        if (t.contains("extractor")) tf = as_transform(extractor_from_json(t.at("extractor")));
        oracle = std::make_unique<ModelOracle>(model_from_json(t.at("model")), space, policy, tf);
      } else {
        // The schema sits next to the transcript as <stem>.schema.json.
        std::ifstream tr(replay_path);
        if (!tr) throw std::runtime_error("cannot open " + replay_path);
        const json schema = read_json(schema_path_for(replay_path).string());
        space = space_from_json(schema);
        oracle = std::make_unique<ReplayOracle>(tr, space, schema.at("classes").get<int>(), policy);
      }
      std::ofstream rec;
      if (!record_path.empty()) {
        rec.open(record_path, std::ios::app);
        oracle->record_to(&rec);
      }
      std::ifstream fin;
      if (!in_path.empty()) {
        fin.open(in_path);
        if (!fin) throw std::runtime_error("cannot open " + in_path);
      }
      std::istream& qin = in_path.empty() ? std::cin : fin;
      std::ofstream fout;
      if (!out.empty()) fout.open(out, std::ios::binary);
      std::ostream& rout = out.empty() ? std::cout : fout;
      std::string line;
      while (std::getline(qin, line)) {
        if (line.empty()) continue;
        rout << response_to_json(oracle->query(query_from_json(json::parse(line)))).dump() << '\n';
      }
      std::cerr << oracle->queries() << " queries answered\n";
    } else if (*attack) {
      ExperimentConfig cfg = config_or_default(config, seed);
      if (!out.empty()) {
        cfg.output.csv = out + ".csv";
        cfg.output.json = out + ".json";
      }
      const ExperimentReport r = run_experiment(cfg);
      emit_report(r, cfg.output);
      if (cfg.output.csv.empty() && cfg.output.json.empty()) std::cout << report_csv(r);
      std::cerr << summary(r);
    } else if (*report) {
      const ExperimentReport r = report_from_json_doc(read_json(in_path));
      if (format == "csv") {
        write_text(out, report_csv(r));
      } else if (format == "json") {
        write_text(out, report_json(r).dump(2) + "\n");
      } else {
        write_text(out, summary(r));
      }
    } else if (*repro) {
      AcceptanceOptions opt;
      opt.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
      opt.out_dir = out;
      int failed = 0;
      run_acceptance(opt, [&](const CriterionResult& r) {
        failed += !r.pass;
        std::cout << format_result(r) << std::endl;
      });
      return failed ? 1 : 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
