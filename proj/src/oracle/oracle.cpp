#include "mexlab/oracle/oracle.hpp"

#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "mexlab/models/predict.hpp"

namespace mexlab {

using nlohmann::json;

void DisclosurePolicy::validate() const {
  if (decimals && *decimals < 1) throw std::invalid_argument("rounding needs at least 1 decimal");
}

bool operator==(const NodeId& a, const NodeId& b) {
  return std::bit_cast<std::uint64_t>(a.output) == std::bit_cast<std::uint64_t>(b.output) &&
         std::bit_cast<std::uint64_t>(a.confidence) == std::bit_cast<std::uint64_t>(b.confidence);
}

bool operator<(const NodeId& a, const NodeId& b) {
  const auto ao = std::bit_cast<std::uint64_t>(a.output), bo = std::bit_cast<std::uint64_t>(b.output);
  if (ao != bo) return ao < bo;
  return std::bit_cast<std::uint64_t>(a.confidence) < std::bit_cast<std::uint64_t>(b.confidence);
}

NodeId node_id(const OracleResponse& r) {
  if (!r.confidence) throw std::logic_error("node ids need confidence values; the API hides them");
  return {r.value ? *r.value : static_cast<double>(r.label), *r.confidence};
}

void QueryLedger::record(const std::string& tag) {
  total_.fetch_add(1);
  std::lock_guard lock(mu_);
  ++tags_[tag];
}

std::size_t QueryLedger::count(const std::string& tag) const {
  std::lock_guard lock(mu_);
  auto it = tags_.find(tag);
  return it == tags_.end() ? 0 : it->second;
}

std::map<std::string, std::size_t> QueryLedger::by_tag() const {
  std::lock_guard lock(mu_);
  return tags_;
}

OracleResponse QueryOracle::query(const PartialQuery& x) {
  if (x.size() != space().size()) {
    throw std::invalid_argument("query has " + std::to_string(x.size()) + " features, API expects " +
                                std::to_string(space().size()));
  }
  x.check(space());
  if (!x.is_complete() && !policy().allow_partial) {
    throw std::invalid_argument("this API does not accept incomplete queries");
  }
  OracleResponse r = answer(x);
  ledger_.record(tag_);
  if (transcript_) {
    std::lock_guard lock(transcript_mu_);
    *transcript_ << json{{"q", query_to_json(x)}, {"r", response_to_json(r)}}.dump() << '\n';
  }
  return r;
}

std::vector<OracleResponse> QueryOracle::query_batch(const std::vector<Point>& xs) {
  std::vector<OracleResponse> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(query(x));
  return out;
}

double round_decimals(double v, int k) {
  const double scale = std::pow(10.0, k);
  // nearbyint honours the default round-to-nearest-even mode.
  return std::nearbyint(v * scale) / scale;
}

ModelOracle::ModelOracle(ModelSpec model, FeatureSpace space, DisclosurePolicy policy,
                         InputTransform transform)
    : model_(std::move(model)),
      space_(std::move(space)),
      policy_(policy),
      transform_(std::move(transform)),
      classes_(num_classes(model_)) {
  policy_.validate();
  if (const auto* t = std::get_if<DecisionTree>(&model_); t && !transform_) t->validate(space_);
}

OracleResponse ModelOracle::answer(const PartialQuery& x) {
  const bool probs = policy_.outputs == OutputKind::Probabilities;
  auto round = [&](double v) { return policy_.decimals ? round_decimals(v, *policy_.decimals) : v; };
  OracleResponse r;
  std::set<std::size_t> fields;
  for (std::size_t i : x.specified()) fields.insert(i);

  const auto* tree = std::get_if<DecisionTree>(&model_);
  if (tree && !transform_) {
    int v = 0;
    while (tree->nodes[v].kind != SplitKind::Leaf) {
      const auto f = static_cast<std::size_t>(tree->nodes[v].feature);
      fields.insert(f);
      if (x.is_missing(f)) break;
      v = tree->child_for(v, *x[f]);
    }
    const TreeNode& node = tree->nodes[v];
    r.label = node.label;
    if (probs) {
      r.confidence = round(node.confidence);
      if (node.value) r.value = node.value;
      ProbVector p = node_distribution(*tree, v);
      for (double& e : p) e = round(e);
      r.probs = std::move(p);
      r.halted_at = node.kind == SplitKind::Leaf ? HaltKind::Leaf : HaltKind::Internal;
      if (policy_.reveal_fields) r.fields = std::vector<std::size_t>(fields.begin(), fields.end());
    }
    return r;
  }

  if (!x.is_complete() && !transform_) {
    throw std::invalid_argument("incomplete queries need a tree or a featurising service");
  }
  const Point features = transform_ ? transform_(x) : x.to_point();
  r.label = predict_class(model_, features);
  if (probs && supports_proba(model_)) {
    ProbVector p = predict_proba(model_, features);
    for (double& e : p) e = round(e);
    r.confidence = p[r.label];
    r.probs = std::move(p);
    if (policy_.reveal_fields) r.fields = std::vector<std::size_t>(fields.begin(), fields.end());
  }
  return r;
}

ReplayOracle::ReplayOracle(std::istream& transcript, FeatureSpace space, int classes,
                           DisclosurePolicy policy)
    : space_(std::move(space)), classes_(classes), policy_(policy) {
  std::string line;
  while (std::getline(transcript, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    table_[j.at("q").dump()] = response_from_json(j.at("r"));
  }
}

OracleResponse ReplayOracle::answer(const PartialQuery& x) {
  auto it = table_.find(query_to_json(x).dump());
  if (it == table_.end()) throw std::out_of_range("query not present in the transcript");
  return it->second;
}

json query_to_json(const PartialQuery& q) {
  json j = json::array();
  for (const auto& v : q.values()) {
    if (v) j.push_back(*v);
    else j.push_back(nullptr);
  }
  return j;
}

PartialQuery query_from_json(const json& j) {
  std::vector<std::optional<double>> vals;
  for (const auto& e : j) {
    if (e.is_null()) vals.emplace_back();
    else vals.emplace_back(e.get<double>());
  }
  return PartialQuery(std::move(vals));
}

json response_to_json(const OracleResponse& r) {
  json j{{"label", r.label}};
  if (r.probs) j["probs"] = *r.probs;
  if (r.confidence) j["confidence"] = *r.confidence;
  if (r.value) j["value"] = *r.value;
  if (r.fields) j["fields"] = *r.fields;
  if (r.halted_at != HaltKind::None) j["halted_at"] = r.halted_at == HaltKind::Leaf ? "leaf" : "internal";
  return j;
}

OracleResponse response_from_json(const json& j) {
  OracleResponse r;
  r.label = j.at("label").get<int>();
  if (j.contains("probs")) r.probs = j["probs"].get<ProbVector>();
  if (j.contains("confidence")) r.confidence = j["confidence"].get<double>();
  if (j.contains("value")) r.value = j["value"].get<double>();
  if (j.contains("fields")) r.fields = j["fields"].get<std::vector<std::size_t>>();
  if (j.contains("halted_at")) {
    r.halted_at = j["halted_at"].get<std::string>() == "leaf" ? HaltKind::Leaf : HaltKind::Internal;
  }
  return r;
}

}  // namespace mexlab
