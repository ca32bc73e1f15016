#pragma once

#include <atomic>
#include <functional>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mexlab/core/dataset.hpp"
#include "mexlab/models/models.hpp"

namespace mexlab {

enum class OutputKind { LabelsOnly, Probabilities };

/// What the prediction API reveals for each query.
struct DisclosurePolicy {
  OutputKind outputs = OutputKind::Probabilities;
  std::optional<int> decimals;  // round probabilities/confidences to k decimals
  bool allow_partial = false;
  bool reveal_fields = false;

  void validate() const;

  static DisclosurePolicy labels_only() { return {OutputKind::LabelsOnly, std::nullopt, false, false}; }
  static DisclosurePolicy probabilities(std::optional<int> decimals = std::nullopt) {
    return {OutputKind::Probabilities, decimals, false, false};
  }
  // Everything a tree service exposes: ids, partial queries and fields.
  static DisclosurePolicy tree_service() {
    return {OutputKind::Probabilities, std::nullopt, true, true};
  }
};

enum class HaltKind { None, Leaf, Internal };

struct OracleResponse {
  int label = 0;
  std::optional<ProbVector> probs;
  std::optional<double> confidence;
  std::optional<double> value;                   // regression output
  std::optional<std::vector<std::size_t>> fields;  // sorted feature indices
  HaltKind halted_at = HaltKind::None;           // trees only

  friend bool operator==(const OracleResponse&, const OracleResponse&) = default;
};

/// Identity of a tree node as seen through the API: (output, confidence).
struct NodeId {
  double output = 0.0;
  double confidence = 0.0;

  // Bit-wise comparison so ids are usable as exact keys.
  friend bool operator==(const NodeId& a, const NodeId& b);
  friend bool operator<(const NodeId& a, const NodeId& b);
};

// Throws std::logic_error when the response carries no confidence.
NodeId node_id(const OracleResponse& r);

/// Thread-safe query accounting.
class QueryLedger {
 public:
  void record(const std::string& tag);
  std::size_t total() const { return total_.load(); }
  std::size_t count(const std::string& tag) const;
  std::map<std::string, std::size_t> by_tag() const;

 private:
  std::atomic<std::size_t> total_{0};
  mutable std::mutex mu_;
  std::map<std::string, std::size_t> tags_;
};

/// The adversary's only window onto a target.
class QueryOracle {
 public:
  virtual ~QueryOracle() = default;

  OracleResponse query(const PartialQuery& x);
  OracleResponse query(const Point& x) { return query(PartialQuery::complete(x)); }
  std::vector<OracleResponse> query_batch(const std::vector<Point>& xs);

  // Public metadata an API exposes: the input schema and class count.
  virtual const FeatureSpace& space() const = 0;
  virtual int classes() const = 0;
  virtual const DisclosurePolicy& policy() const = 0;

  const QueryLedger& ledger() const { return ledger_; }
  std::size_t queries() const { return ledger_.total(); }

  // Subsequent queries are credited to this tag.
  void set_tag(std::string tag) { tag_ = std::move(tag); }
  const std::string& tag() const { return tag_; }

  // Appends every (query, response) pair as one JSON line.
  void record_to(std::ostream* out) { transcript_ = out; }

 protected:
  virtual OracleResponse answer(const PartialQuery& x) = 0;

 private:
  QueryLedger ledger_;
  std::string tag_ = "default";
  std::ostream* transcript_ = nullptr;
  std::mutex transcript_mu_;
};

/// Maps a (possibly partial) input over the API's input space to the model's
/// feature vector. Used for services that featurise inputs before predicting.
using InputTransform = std::function<Point(const PartialQuery&)>;

class ModelOracle : public QueryOracle {
 public:
  // Without a transform the input space is the model's feature space.
  ModelOracle(ModelSpec model, FeatureSpace space, DisclosurePolicy policy,
              InputTransform transform = {});

  const FeatureSpace& space() const override { return space_; }
  int classes() const override { return classes_; }
  const DisclosurePolicy& policy() const override { return policy_; }
  const ModelSpec& model() const { return model_; }

 protected:
  OracleResponse answer(const PartialQuery& x) override;

 private:
  ModelSpec model_;
  FeatureSpace space_;
  DisclosurePolicy policy_;
  InputTransform transform_;
  int classes_;
};

/// Answers from a recorded transcript; unseen queries are an error.
class ReplayOracle : public QueryOracle {
 public:
  ReplayOracle(std::istream& transcript, FeatureSpace space, int classes, DisclosurePolicy policy);

  const FeatureSpace& space() const override { return space_; }
  int classes() const override { return classes_; }
  const DisclosurePolicy& policy() const override { return policy_; }
  std::size_t recorded() const { return table_.size(); }

 protected:
  OracleResponse answer(const PartialQuery& x) override;

 private:
  FeatureSpace space_;
  int classes_;
  DisclosurePolicy policy_;
  std::map<std::string, OracleResponse> table_;
};

// Round half to even at k decimals.
double round_decimals(double v, int k);

nlohmann::json query_to_json(const PartialQuery& q);
PartialQuery query_from_json(const nlohmann::json& j);
nlohmann::json response_to_json(const OracleResponse& r);
OracleResponse response_from_json(const nlohmann::json& j);

}  // namespace mexlab
