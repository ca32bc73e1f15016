#pragma once

#include <filesystem>

#include "json.hpp"

#include "mexlab/models/models.hpp"

namespace mexlab {

// Every model object carries a "kind" discriminator; trees nest their nodes.
// Doubles are written in shortest round-trip form, so save/load is lossless.
nlohmann::json model_to_json(const ModelSpec& m);
ModelSpec model_from_json(const nlohmann::json& j);

void save_model(const ModelSpec& m, const std::filesystem::path& path);
ModelSpec load_model(const std::filesystem::path& path);

}  // namespace mexlab
