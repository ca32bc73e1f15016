#include "mexlab/core/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mexlab {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json space_to_json(const FeatureSpace& space) {
  json dims = json::array();
  for (const auto& k : space.dims()) {
    if (const auto* c = std::get_if<Continuous>(&k)) {
      dims.push_back({{"kind", "continuous"}, {"lo", c->lo}, {"hi", c->hi}});
    } else {
      dims.push_back({{"kind", "categorical"}, {"arity", std::get<Categorical>(k).arity}});
    }
  }
  return json{{"dims", dims}};
}

json schema_to_json(const FeatureSpace& space, int classes) {
  json j = space_to_json(space);
  j["classes"] = classes;
  return j;
}

FeatureSpace space_from_json(const json& j) {
  std::vector<FeatureKind> dims;
  for (const auto& d : j.at("dims")) {
    const auto kind = d.at("kind").get<std::string>();
    if (kind == "continuous") {
      dims.emplace_back(Continuous{d.at("lo").get<double>(), d.at("hi").get<double>()});
    } else if (kind == "categorical") {
      dims.emplace_back(Categorical{d.at("arity").get<int>()});
    } else {
      throw std::invalid_argument("unknown feature kind '" + kind + "'");
    }
  }
  return FeatureSpace(std::move(dims));
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const std::size_t d = data.space.size();
  for (std::size_t i = 0; i < d; ++i) out << 'f' << i << ',';
  out << "label\n";
  for (const auto& row : data.rows) {
    for (std::size_t i = 0; i < d; ++i) {
      if (data.space.is_continuous(i)) {
        out << format_double(row.x[i]);
      } else {
        out << static_cast<long long>(row.x[i]);
      }
      out << ',';
    }
    out << row.y << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in, const FeatureSpace& space, int classes) {
  Dataset data;
  data.space = space;
  data.classes = classes;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset CSV is empty");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{}) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      fields.push_back(v);
    }
    if (fields.size() != space.size() + 1) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected " +
                               std::to_string(space.size() + 1) + " fields");
    }
    LabeledPoint p;
    p.y = static_cast<int>(fields.back());
    fields.pop_back();
    p.x = std::move(fields);
    data.rows.push_back(std::move(p));
  }
  data.validate();
  return data;
}

std::filesystem::path schema_path_for(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".schema.json");
  return p;
}

void save_dataset(const Dataset& data, const std::filesystem::path& csv_path) {
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
  write_dataset_csv(csv, data);
  std::ofstream schema(schema_path_for(csv_path));
  if (!schema) throw std::runtime_error("cannot write schema for " + csv_path.string());
  schema << schema_to_json(data.space, data.classes).dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& csv_path) {
  std::ifstream schema(schema_path_for(csv_path));
  if (!schema) throw std::runtime_error("missing schema for " + csv_path.string());
  const json j = json::parse(schema);
  std::ifstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot read " + csv_path.string());
  return read_dataset_csv(csv, space_from_json(j), j.at("classes").get<int>());
}

}  // namespace mexlab
