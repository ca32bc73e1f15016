#include "mexlab/models/serialize.hpp"

#include <fstream>
#include <stdexcept>

namespace mexlab {

using nlohmann::json;

namespace {

json kernel_to_json(const Kernel& k) {
  if (const auto* p = std::get_if<PolyKernel>(&k)) return {{"type", "poly"}, {"degree", p->degree}};
  if (const auto* r = std::get_if<RbfKernel>(&k)) return {{"type", "rbf"}, {"gamma", r->gamma}};
  return {{"type", "linear"}};
}

Kernel kernel_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "poly") return PolyKernel{j.at("degree").get<int>()};
  if (type == "rbf") return RbfKernel{j.at("gamma").get<double>()};
  if (type == "linear") return LinearKernel{};
  throw std::invalid_argument("unknown kernel type: " + type);
}

const char* split_name(SplitKind k) {
  switch (k) {
    case SplitKind::Leaf:
      return "leaf";
    case SplitKind::CategoricalBinary:
      return "categorical_binary";
    case SplitKind::CategoricalMulti:
      return "categorical_multi";
    case SplitKind::Threshold:
      return "threshold";
  }
  return "leaf";
}

SplitKind split_from_name(const std::string& s) {
  if (s == "leaf") return SplitKind::Leaf;
  if (s == "categorical_binary") return SplitKind::CategoricalBinary;
  if (s == "categorical_multi") return SplitKind::CategoricalMulti;
  if (s == "threshold") return SplitKind::Threshold;
  throw std::invalid_argument("unknown split kind: " + s);
}

json node_to_json(const DecisionTree& t, int v) {
  const TreeNode& n = t.nodes[v];
  json j{{"split", split_name(n.kind)}, {"label", n.label}, {"confidence", n.confidence}};
  if (n.value) j["value"] = *n.value;
  if (!n.distribution.empty()) j["distribution"] = n.distribution;
  if (n.kind == SplitKind::Leaf) return j;
  j["feature"] = n.feature;
  if (n.kind == SplitKind::Threshold) j["threshold"] = n.threshold;
  if (n.kind == SplitKind::CategoricalBinary) j["left_set"] = n.left_set;
  json kids = json::array();
  for (int c : n.children) kids.push_back(node_to_json(t, c));
  j["children"] = std::move(kids);
  return j;
}

int node_from_json(DecisionTree& t, const json& j) {
  const int v = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  TreeNode n;
  n.kind = split_from_name(j.at("split").get<std::string>());
  n.label = j.at("label").get<int>();
  n.confidence = j.at("confidence").get<double>();
  if (j.contains("value")) n.value = j["value"].get<double>();
  if (j.contains("distribution")) n.distribution = j["distribution"].get<ProbVector>();
  if (n.kind != SplitKind::Leaf) {
    n.feature = j.at("feature").get<int>();
    if (j.contains("threshold")) n.threshold = j["threshold"].get<double>();
    if (j.contains("left_set")) n.left_set = j["left_set"].get<std::vector<int>>();
    for (const auto& c : j.at("children")) n.children.push_back(node_from_json(t, c));
  }
  t.nodes[v] = std::move(n);
  return v;
}

}  // namespace

json model_to_json(const ModelSpec& m) {
  json j{{"kind", kind_name(m)}};
  if (const auto* s = std::get_if<BinaryLR>(&m)) {
    j["w"] = s->w;
    j["beta"] = s->beta;
  } else if (const auto* s = std::get_if<SoftmaxLR>(&m)) {
    j["w"] = s->w;
    j["betas"] = s->betas;
  } else if (const auto* s = std::get_if<OvRLR>(&m)) {
    j["w"] = s->w;
    j["betas"] = s->betas;
  } else if (const auto* s = std::get_if<MLP>(&m)) {
    j["w1"] = s->w1;
    j["b1"] = s->b1;
    j["w2"] = s->w2;
    j["b2"] = s->b2;
    j["activation"] = "tanh";
  } else if (const auto* s = std::get_if<KernelLR>(&m)) {
    j["alphas"] = s->alphas;
    j["betas"] = s->betas;
    j["representers"] = s->representers;
    j["gamma"] = s->gamma;
  } else if (const auto* s = std::get_if<SVM>(&m)) {
    j["kernel"] = kernel_to_json(s->kernel);
    j["beta"] = s->beta;
    if (!s->w.empty()) j["w"] = s->w;
    if (!s->dual_alphas.empty()) {
      j["dual_alphas"] = s->dual_alphas;
      j["support_vectors"] = s->support_vectors;
    }
  } else if (const auto* t = std::get_if<DecisionTree>(&m)) {
    j["classes"] = t->classes;
    j["regression"] = t->regression;
    j["root"] = node_to_json(*t, 0);
  }
  return j;
}

ModelSpec model_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "binary_lr") return BinaryLR{j.at("w").get<std::vector<double>>(), j.at("beta")};
  if (kind == "softmax") return SoftmaxLR{j.at("w").get<Weights>(), j.at("betas")};
  if (kind == "ovr") return OvRLR{j.at("w").get<Weights>(), j.at("betas")};
  if (kind == "mlp") {
    return MLP{j.at("w1").get<Weights>(), j.at("b1").get<std::vector<double>>(),
               j.at("w2").get<Weights>(), j.at("b2").get<std::vector<double>>()};
  }
  if (kind == "kernel_lr") {
    return KernelLR{j.at("alphas").get<Weights>(), j.at("betas").get<std::vector<double>>(),
                    j.at("representers").get<std::vector<Point>>(), j.at("gamma").get<double>()};
  }
  if (kind == "svm") {
    SVM s;
    s.kernel = kernel_from_json(j.at("kernel"));
    s.beta = j.at("beta").get<double>();
    if (j.contains("w")) s.w = j["w"].get<std::vector<double>>();
    if (j.contains("dual_alphas")) {
      s.dual_alphas = j["dual_alphas"].get<std::vector<double>>();
      s.support_vectors = j.at("support_vectors").get<std::vector<Point>>();
    }
    return s;
  }
  if (kind == "tree") {
    DecisionTree t;
    t.classes = j.at("classes").get<int>();
    t.regression = j.value("regression", false);
    node_from_json(t, j.at("root"));
    return t;
  }
  throw std::invalid_argument("unknown model kind: " + kind);
}

void save_model(const ModelSpec& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << model_to_json(m).dump(2) << '\n';
}

ModelSpec load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return model_from_json(json::parse(in));
}

}  // namespace mexlab
