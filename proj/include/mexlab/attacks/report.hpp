#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "mexlab/core/metrics.hpp"

namespace mexlab {

/// Outcome of one extraction: query cost and the four error measures. The TV
/// fields are empty when either model exposes labels only.
struct ExtractionReport {
  std::string kind;
  double alpha = 0.0;
  std::size_t queries_used = 0;
  double r_test = 0.0;
  double r_unif = 0.0;
  std::optional<double> r_test_tv;
  std::optional<double> r_unif_tv;
  double wall_time_ms = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const ExtractionReport&, const ExtractionReport&) = default;
};

nlohmann::json report_to_json(const ExtractionReport& r);
ExtractionReport report_from_json(const nlohmann::json& j);

// Fills the four error fields by comparing f and fhat on data's test rows
// and on n_unif uniform points of space. Without data the test fields copy
// the uniform ones.
void score_extraction(ExtractionReport& r, const Predictor& f, const Predictor& fhat,
                      const Dataset* data, const FeatureSpace& space,
                      std::size_t n_unif = kDefaultUniformSamples, std::uint64_t seed = 0);

}  // namespace mexlab
