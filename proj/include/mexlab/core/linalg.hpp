#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace mexlab {

/// Small dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct SingularMatrix : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Solves a x = b by Gaussian elimination with partial pivoting. Throws
// SingularMatrix when a pivot falls below pivot_tol times the largest entry.
std::vector<double> solve_linear(Matrix a, std::vector<double> b, double pivot_tol = 1e-12);

// Orthonormal basis of the numerical null space: right singular vectors whose
// singular value is at most rel_tol times the largest one.
std::vector<std::vector<double>> null_space(const Matrix& a, double rel_tol = 1e-10);

// A unit-norm vector spanning the null space of a. Throws SingularMatrix when
// the numerical null space is not one-dimensional.
std::vector<double> null_vector(Matrix a, double rel_tol = 1e-10);

// argmin ||a x - b||^2 + ridge ||x||^2 (QR without ridge, normal equations with).
std::vector<double> least_squares(const Matrix& a, const std::vector<double>& b,
                                  double ridge = 0.0);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);

}  // namespace mexlab
