#pragma once

#include <map>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mexlab/attacks/line_search.hpp"
#include "mexlab/oracle/oracle.hpp"

namespace mexlab {

struct IdentityDim {};
struct OneHotDim {
  int arity = 2;
};
/// k bins from k - 1 increasing boundaries; a value equal to a boundary
/// falls in the bin to its left.
struct QuantileBinDim {
  std::vector<double> boundaries;
};
using DimTransform = std::variant<IdentityDim, OneHotDim, QuantileBinDim>;

/// Service-side featurisation from the input space M to the model space X.
struct FeatureExtractor {
  FeatureSpace input;
  std::vector<DimTransform> dims;

  // Throws when a transform does not fit its input dimension.
  void validate() const;
  std::size_t width(std::size_t i) const;   // expanded coordinates of dim i
  std::size_t offset(std::size_t i) const;  // first expanded coordinate of dim i
  std::size_t output_dim() const;
  // Identity dims keep their range; indicator coordinates live on [0, 1].
  FeatureSpace output_space() const;
};

// Bin of v: the first boundary >= v, or the last bin.
std::size_t bin_index(const std::vector<double>& boundaries, double v);

// Expands a query; MISSING input dims become all-zero blocks.
Point apply_extractor(const FeatureExtractor& ex, const PartialQuery& m);

InputTransform as_transform(const FeatureExtractor& ex);

// k-quantile boundaries of values (duplicates collapse).
std::vector<double> fit_quantile_bins(std::vector<double> values, int k);

nlohmann::json extractor_to_json(const FeatureExtractor& ex);
FeatureExtractor extractor_from_json(const nlohmann::json& j);

/// Bin boundaries found on one input dim, with the pieces that found them.
struct BinSearch {
  std::size_t dim = 0;
  std::vector<double> boundaries;
  std::vector<Piece> pieces;
};

// Line search of dim over its full range with every other dim MISSING.
// Boundaries are reported as the grid value at or just below the threshold.
BinSearch recover_bins(QueryOracle& oracle, std::size_t dim, double eps = 1e-3);

struct ComposedExtraction {
  ModelSpec model;  // BinaryLR for two classes, SoftmaxLR (class 0 pinned at zero) otherwise
  std::size_t queries = 0;  // issued by this call
  std::size_t reused = 0;   // equations read from bin-search responses
  bool dense = false;       // fell back to dense equations
};

// Recovers a linear model over ex(M) from single-feature queries plus one
// all-MISSING query for the bias. Responses already seen during bin
// recovery are reused. Without partial queries it falls back to solving a
// dense system from random complete inputs.
ComposedExtraction extract_composed_linear(QueryOracle& oracle, const FeatureExtractor& ex,
                                           const std::vector<BinSearch>& searches = {},
                                           std::uint64_t seed = 0);

}  // namespace mexlab
