#pragma once

#include <cstdint>
#include <string>

#include "mexlab/core/dataset.hpp"

namespace mexlab {

/// Shape knobs for the synthetic generators. Record counts and class counts
/// follow the benchmark table; noise levels are free parameters.
struct SyntheticOptions {
  double noise = -1.0;          // ring/moon jitter or cluster spread; < 0 picks the default
  int centers = -1;             // blobs / five_class cluster count; < 0 picks the default
  double train_fraction = 0.7;
};

// circles | moons | blobs | five_class. Features are scaled to [-1, 1].
Dataset gen_synthetic(const std::string& name, std::size_t n, std::uint64_t seed,
                      const SyntheticOptions& opt = {});

// Default record count per generator (5,000, or 1,000 for five_class).
std::size_t default_size(const std::string& name);

/// Census-shaped raw inputs for the feature-extraction experiments: six
/// numeric fields on their natural ranges and eight categorical fields with
/// census arities. Labels come from a hidden noisy linear rule.
Dataset adult_shaped(std::size_t n, std::uint64_t seed);

}  // namespace mexlab
