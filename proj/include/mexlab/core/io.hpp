#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "mexlab/core/dataset.hpp"

namespace mexlab {

// {"dims":[{"kind":"continuous","lo":-1,"hi":1},{"kind":"categorical","arity":4}],"classes":3}
nlohmann::json schema_to_json(const FeatureSpace& space, int classes);
FeatureSpace space_from_json(const nlohmann::json& j);
nlohmann::json space_to_json(const FeatureSpace& space);

// CSV with header f0,...,f{d-1},label. The split is not stored.
void write_dataset_csv(std::ostream& out, const Dataset& data);
Dataset read_dataset_csv(std::istream& in, const FeatureSpace& space, int classes);

// Writes <stem>.csv and <stem>.schema.json.
void save_dataset(const Dataset& data, const std::filesystem::path& csv_path);
Dataset load_dataset(const std::filesystem::path& csv_path);

std::filesystem::path schema_path_for(const std::filesystem::path& csv_path);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace mexlab
