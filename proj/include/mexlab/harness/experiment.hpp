#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mexlab/attacks/report.hpp"
#include "mexlab/core/dataset.hpp"
#include "mexlab/featrev/featrev.hpp"
#include "mexlab/models/models.hpp"
#include "mexlab/oracle/oracle.hpp"
#include "mexlab/training/optimizer.hpp"

namespace mexlab {

struct DatasetConfig {
  // circles | moons | blobs | five_class | adult_shaped | tree_corpus, or a
  // CSV path (with a schema file next to it).
  std::string name = "circles";
  std::size_t n = 0;  // 0 picks the generator's default size
  double noise = -1.0;
  int centers = -1;
  double train_fraction = 0.7;
};

struct TargetConfig {
  // binary_lr | softmax | ovr | mlp | kernel_lr | svm | tree | random_tree
  std::string kind = "binary_lr";
  int hidden = kDefaultHiddenUnits;
  int representers = 8;
  double gamma = 1.0;
  std::string kernel = "rbf";  // svm: linear | poly | rbf
  int degree = 2;
  double l2_lambda = kTargetLambda;
  int max_epochs = 1000;
  int max_depth = 8;   // tree
  int leaves = 16;     // random_tree
  int bins = 0;        // > 0 quantile-bins every numeric input before the model
};

struct OracleConfig {
  std::string outputs = "probabilities";  // probabilities | labels
  std::optional<int> decimals;
  bool allow_partial = false;
  bool reveal_fields = false;

  DisclosurePolicy policy() const;
};

struct AttackConfig {
  // eqsolve | klr_leakage | path_find | top_down | lowd_meek | retrain |
  // improper | featrev
  std::string name = "eqsolve";
  std::string surrogate;          // retrain: binary_lr | softmax | ovr | mlp | svm_rbf | svm_linear
  std::string strategy = "adaptive";
  int rounds = 5;
  int hidden = kDefaultHiddenUnits;  // improper / mlp surrogates
  int representers = 8;              // klr_leakage
  int restarts = 1;
  int degree = 1;                    // lowd_meek
  double eps = 1e-3;                 // tree and bin line searches
  double l2_lambda = kTargetLambda;  // retrain surrogates
  std::size_t uniform_samples = kDefaultUniformSamples;
};

struct OutputConfig {
  std::string csv;
  std::string json;
  bool record_timing = false;  // off keeps CSV output byte-stable
};

struct ExperimentConfig {
  std::string name = "experiment";
  DatasetConfig dataset;
  TargetConfig target;
  OracleConfig oracle;
  AttackConfig attack;
  std::vector<double> alphas{1.0};
  std::vector<std::uint64_t> seeds{0};
  int threads = 1;
  OutputConfig output;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& toml_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// One (seed, alpha) cell. A failed cell keeps its error and no metrics.
struct CellResult {
  ExtractionReport report;
  std::optional<std::string> error;
  nlohmann::json extra = nlohmann::json::object();  // attack-specific measurements

  friend bool operator==(const CellResult&, const CellResult&) = default;
};

struct Aggregate {
  double alpha = 0.0;
  std::size_t cells = 0;  // successful cells
  double mean_queries = 0.0;
  double mean_r_test = 0.0, std_r_test = 0.0;
  double mean_r_unif = 0.0, std_r_unif = 0.0;

  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

struct ExperimentReport {
  std::string name;
  std::vector<CellResult> cells;  // seed-major, then alpha, in config order
  std::vector<Aggregate> aggregates;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

/// A trained target with its data and (optional) input featurisation.
struct PreparedTarget {
  Dataset data;
  bool has_data = true;  // random_tree targets have a space but no rows
  ModelSpec model;
  std::optional<FeatureExtractor> extractor;

  const FeatureSpace& input_space() const { return data.space; }
  int classes() const { return data.classes; }
  // Target predictions over the input space.
  Predictor predictor() const;
  std::unique_ptr<ModelOracle> oracle(const DisclosurePolicy& policy) const;
};

Dataset make_dataset(const DatasetConfig& cfg, std::uint64_t seed);
PreparedTarget prepare_target(const ExperimentConfig& cfg, std::uint64_t seed);

// Runs one cell against a prepared target; errors propagate.
CellResult run_cell(const ExperimentConfig& cfg, const PreparedTarget& target, std::uint64_t seed,
                    double alpha);

// Every (seed, alpha) cell, on cfg.threads workers. Cell errors are recorded
// and the run continues; the report order never depends on scheduling.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

std::string report_csv(const ExperimentReport& r);
nlohmann::json report_json(const ExperimentReport& r);
ExperimentReport report_from_json_doc(const nlohmann::json& j);

// Writes whichever of cfg.output.csv / cfg.output.json are set.
void emit_report(const ExperimentReport& r, const OutputConfig& out);

}  // namespace mexlab
