#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mexlab/harness/experiment.hpp"
#include "toml.hpp"

namespace mexlab {

namespace {

// Rejects keys the reader does not know, so typos do not silently fall back
// to defaults.
void check_keys(const toml::table& t, const std::string& where, const std::set<std::string>& known) {
  for (const auto& [k, v] : t) {
    if (!known.count(std::string(k.str()))) {
      throw std::invalid_argument("config: unknown key " + where + std::string(k.str()));
    }
  }
}

template <typename T>
void read(const toml::table& t, const char* key, const std::string& where, T& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if constexpr (std::is_same_v<T, double>) {
    // Integers are accepted where reals are expected.
    if (auto v = n->value<double>()) {
      out = *v;
      return;
    }
  } else if constexpr (std::is_same_v<T, bool> || std::is_same_v<T, std::string>) {
    if (auto v = n->value_exact<T>()) {
      out = *v;
      return;
    }
  } else {
    if (auto v = n->value_exact<std::int64_t>()) {
      if (*v < 0 && std::is_unsigned_v<T>) {
        throw std::invalid_argument("config: " + where + key + " must be non-negative");
      }
      out = static_cast<T>(*v);
      return;
    }
  }
  throw std::invalid_argument("config: wrong type for " + where + key);
}

const toml::table* sub(const toml::table& t, const char* key) {
  const toml::node* n = t.get(key);
  if (!n) return nullptr;
  if (!n->is_table()) throw std::invalid_argument(std::string("config: [") + key + "] must be a table");
  return n->as_table();
}

}  // namespace

ExperimentConfig parse_config(const std::string& toml_text) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config: " << e.description() << " at line " << e.source().begin.line;
    throw std::invalid_argument(msg.str());
  }
  check_keys(root, "",
             {"name", "alphas", "seeds", "threads", "dataset", "target", "oracle", "attack", "output"});
  ExperimentConfig c;
  read(root, "name", "", c.name);
  read(root, "threads", "", c.threads);
  if (const toml::node* n = root.get("alphas")) {
    const toml::array* a = n->as_array();
    if (!a) throw std::invalid_argument("config: alphas must be an array");
    c.alphas.clear();
    for (const auto& v : *a) {
      auto x = v.value<double>();
      if (!x) throw std::invalid_argument("config: alphas must hold numbers");
      c.alphas.push_back(*x);
    }
  }
  if (const toml::node* n = root.get("seeds")) {
    const toml::array* a = n->as_array();
    if (!a) throw std::invalid_argument("config: seeds must be an array");
    c.seeds.clear();
    for (const auto& v : *a) {
      auto x = v.value_exact<std::int64_t>();
      if (!x || *x < 0) throw std::invalid_argument("config: seeds must be non-negative integers");
      c.seeds.push_back(static_cast<std::uint64_t>(*x));
    }
  }
  if (const auto* t = sub(root, "dataset")) {
    check_keys(*t, "dataset.", {"name", "n", "noise", "centers", "train_fraction"});
    read(*t, "name", "dataset.", c.dataset.name);
    read(*t, "n", "dataset.", c.dataset.n);
    read(*t, "noise", "dataset.", c.dataset.noise);
    read(*t, "centers", "dataset.", c.dataset.centers);
    read(*t, "train_fraction", "dataset.", c.dataset.train_fraction);
  }
  if (const auto* t = sub(root, "target")) {
    check_keys(*t, "target.", {"kind", "hidden", "representers", "gamma", "kernel", "degree",
                               "l2_lambda", "max_epochs", "max_depth", "leaves", "bins"});
    auto& g = c.target;
    read(*t, "kind", "target.", g.kind);
    read(*t, "hidden", "target.", g.hidden);
    read(*t, "representers", "target.", g.representers);
    read(*t, "gamma", "target.", g.gamma);
    read(*t, "kernel", "target.", g.kernel);
    read(*t, "degree", "target.", g.degree);
    read(*t, "l2_lambda", "target.", g.l2_lambda);
    read(*t, "max_epochs", "target.", g.max_epochs);
    read(*t, "max_depth", "target.", g.max_depth);
    read(*t, "leaves", "target.", g.leaves);
    read(*t, "bins", "target.", g.bins);
  }
  if (const auto* t = sub(root, "oracle")) {
    check_keys(*t, "oracle.", {"outputs", "decimals", "allow_partial", "reveal_fields"});
    read(*t, "outputs", "oracle.", c.oracle.outputs);
    if (t->contains("decimals")) {
      int k = 0;
      read(*t, "decimals", "oracle.", k);
      c.oracle.decimals = k;
    }
    read(*t, "allow_partial", "oracle.", c.oracle.allow_partial);
    read(*t, "reveal_fields", "oracle.", c.oracle.reveal_fields);
  }
  if (const auto* t = sub(root, "attack")) {
    check_keys(*t, "attack.", {"name", "surrogate", "strategy", "rounds", "hidden", "representers",
                               "restarts", "degree", "eps", "l2_lambda", "uniform_samples"});
    auto& a = c.attack;
    read(*t, "name", "attack.", a.name);
    read(*t, "surrogate", "attack.", a.surrogate);
    read(*t, "strategy", "attack.", a.strategy);
    read(*t, "rounds", "attack.", a.rounds);
    read(*t, "hidden", "attack.", a.hidden);
    read(*t, "representers", "attack.", a.representers);
    read(*t, "restarts", "attack.", a.restarts);
    read(*t, "degree", "attack.", a.degree);
    read(*t, "eps", "attack.", a.eps);
    read(*t, "l2_lambda", "attack.", a.l2_lambda);
    read(*t, "uniform_samples", "attack.", a.uniform_samples);
  }
  if (const auto* t = sub(root, "output")) {
    check_keys(*t, "output.", {"csv", "json", "record_timing"});
    read(*t, "csv", "output.", c.output.csv);
    read(*t, "json", "output.", c.output.json);
    read(*t, "record_timing", "output.", c.output.record_timing);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace mexlab
