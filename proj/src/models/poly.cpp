#include "mexlab/models/poly.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace mexlab {

namespace {

// (x.x' + 1)^p expands over exponent vectors (k_0, k_1..k_d) summing to p,
// with k_0 = left the power of the constant term.
void for_each_exponent(std::size_t d, int degree,
                       const std::function<void(const std::vector<int>&, int)>& fn) {
  if (degree < 1) throw std::invalid_argument("poly_feature_map: degree must be positive");
  std::vector<int> k(d, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i == d) {
      fn(k, left);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      k[i] = e;
      rec(i + 1, left - e);
    }
    k[i] = 0;
  };
  rec(0, degree);
}

}  // namespace

std::vector<double> poly_feature_map(const Point& x, int degree) {
  const std::size_t d = x.size();
  std::vector<double> out;
  out.reserve(poly_feature_dim(d, degree));
  for_each_exponent(d, degree, [&](const std::vector<int>& k, int left) {
    double coef = std::lgamma(degree + 1.0) - std::lgamma(left + 1.0);
    double mono = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      coef -= std::lgamma(k[j] + 1.0);
      mono *= std::pow(x[j], k[j]);
    }
    // The multinomial coefficient is an integer; round away lgamma noise.
    out.push_back(std::sqrt(std::round(std::exp(coef))) * mono);
  });
  return out;
}

std::vector<std::vector<int>> poly_exponents(std::size_t d, int degree) {
  std::vector<std::vector<int>> out;
  for_each_exponent(d, degree, [&](const std::vector<int>& k, int) { out.push_back(k); });
  return out;
}

std::size_t poly_feature_dim(std::size_t d, int degree) {
  // C(d + p, p)
  std::size_t r = 1;
  for (int i = 1; i <= degree; ++i) r = r * (d + static_cast<std::size_t>(i)) / i;
  return r;
}

}  // namespace mexlab
