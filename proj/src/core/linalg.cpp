#include "mexlab/core/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace mexlab {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

namespace {

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) m = std::max(m, std::abs(a(r, c)));
  }
  return m;
}

}  // namespace

std::vector<double> solve_linear(Matrix a, std::vector<double> b, double pivot_tol) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve_linear: shape mismatch");
  const double scale = std::max(max_abs(a), 1e-300);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::abs(a(r, k)) > std::abs(a(piv, k))) piv = r;
    }
    if (std::abs(a(piv, k)) <= pivot_tol * scale) throw SingularMatrix("singular linear system");
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(piv, c));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = a(r, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t c = k; c < n; ++c) a(r, c) -= f * a(k, c);
      b[r] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t c = k + 1; c < n; ++c) s -= a(k, c) * x[c];
    x[k] = s / a(k, k);
  }
  return x;
}

namespace {

Eigen::MatrixXd to_eigen(const Matrix& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) m(r, c) = a(r, c);
  }
  return m;
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
  std::vector<double> v(m.rows());
  for (Eigen::Index r = 0; r < m.rows(); ++r) v[r] = m(r, c);
  return v;
}

}  // namespace

std::vector<std::vector<double>> null_space(const Matrix& a, double rel_tol) {
  if (a.cols() == 0) throw std::invalid_argument("null_space: no columns");
  const Eigen::MatrixXd m = to_eigen(a);
  // Pad to at least cols rows so the full right singular basis is available.
  Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(std::max(m.rows(), m.cols()), m.cols());
  padded.topRows(m.rows()) = m;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(padded, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = rel_tol * std::max(sv.size() ? sv(0) : 0.0, 1e-300);
  std::vector<std::vector<double>> basis;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) <= cut) basis.push_back(column(svd.matrixV(), k));
  }
  return basis;
}

std::vector<double> null_vector(Matrix a, double rel_tol) {
  const auto basis = null_space(a, rel_tol);
  if (basis.size() != 1) {
    throw SingularMatrix("null space has dimension " + std::to_string(basis.size()));
  }
  return basis[0];
}

std::vector<double> least_squares(const Matrix& a, const std::vector<double>& b, double ridge) {
  if (b.size() != a.rows()) throw std::invalid_argument("least_squares: shape mismatch");
  const Eigen::MatrixXd m = to_eigen(a);
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
  Eigen::VectorXd x;
  if (ridge > 0.0) {
    Eigen::MatrixXd g = m.transpose() * m;
    g.diagonal().array() += ridge;
    x = g.ldlt().solve(m.transpose() * rhs);
  } else {
    x = m.colPivHouseholderQr().solve(rhs);
  }
  return std::vector<double>(x.data(), x.data() + x.size());
}

}  // namespace mexlab
