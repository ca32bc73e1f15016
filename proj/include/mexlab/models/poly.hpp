#pragma once

#include <vector>

#include "mexlab/core/feature_space.hpp"

namespace mexlab {

/// Explicit feature map of the kernel (x.x' + 1)^degree: one coordinate per
/// monomial of total degree <= degree, scaled by the square root of its
/// multinomial coefficient. Coordinate 0 is the constant monomial (value 1).
std::vector<double> poly_feature_map(const Point& x, int degree);

// Exponent vector of the monomial behind each poly_feature_map coordinate.
std::vector<std::vector<int>> poly_exponents(std::size_t d, int degree);

// Dimension of poly_feature_map for d inputs: C(d + degree, degree).
std::size_t poly_feature_dim(std::size_t d, int degree);

}  // namespace mexlab
