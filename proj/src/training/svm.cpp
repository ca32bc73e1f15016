#include "mexlab/training/svm.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mexlab {

namespace {

SVM fit_linear(const std::vector<LabeledPoint>& rows, const OptimizerConfig& cfg,
               SvmFitInfo* info) {
  const std::size_t n = rows.size(), d = rows[0].x.size();
  const double lambda = std::max(cfg.l2_lambda, 1e-12);
  std::vector<double> w(d, 0.0), w_avg(d, 0.0), g(d);
  double b = 0.0, b_avg = 0.0;
  const int epochs = std::max(cfg.max_epochs, 1);
  const int avg_from = epochs / 2;
  int averaged = 0;
  for (int t = 1; t <= epochs; ++t) {
    // Full-batch subgradient of lambda |w|^2 + mean hinge, step 1/(lambda t).
    std::fill(g.begin(), g.end(), 0.0);
    double gb = 0.0;
    for (const auto& r : rows) {
      const double y = r.y == 1 ? 1.0 : -1.0;
      const double margin = y * (std::inner_product(w.begin(), w.end(), r.x.begin(), 0.0) + b);
      if (margin < 1.0) {
        for (std::size_t j = 0; j < d; ++j) g[j] -= y * r.x[j];
        gb -= y;
      }
    }
    const double eta = 1.0 / (2.0 * lambda * t);
    for (std::size_t j = 0; j < d; ++j) w[j] -= eta * (2.0 * lambda * w[j] + g[j] / n);
    // The bias is unregularised; a damped step keeps it from oscillating.
    b -= std::min(eta, 1.0) * gb / n;
    if (t > avg_from) {
      ++averaged;
      for (std::size_t j = 0; j < d; ++j) w_avg[j] += (w[j] - w_avg[j]) / averaged;
      b_avg += (b - b_avg) / averaged;
    }
  }
  if (info) {
    info->iterations = epochs;
    info->converged = true;
  }
  SVM s;
  s.kernel = LinearKernel{};
  s.w = w_avg;
  s.beta = b_avg;
  return s;
}

SVM fit_smo(const Kernel& kernel, const std::vector<LabeledPoint>& rows,
            const OptimizerConfig& cfg, SvmFitInfo* info) {
  const std::size_t n = rows.size();
  const double lambda = std::max(cfg.l2_lambda, 1e-12);
  const double C = 1.0 / (2.0 * static_cast<double>(n) * lambda);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = rows[i].y == 1 ? 1.0 : -1.0;

  // Cache the Gram matrix when it fits in a modest budget; otherwise compute
  // rows on demand.
  const bool cached = n <= 3000;
  std::vector<double> gram;
  if (cached) {
    gram.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j)
        gram[i * n + j] = gram[j * n + i] = kernel_eval(kernel, rows[i].x, rows[j].x);
  }
  std::vector<double> row_buf(n);
  auto krow = [&](std::size_t i) -> const double* {
    if (cached) return &gram[i * n];
    for (std::size_t j = 0; j < n; ++j) row_buf[j] = kernel_eval(kernel, rows[i].x, rows[j].x);
    return row_buf.data();
  };

  std::vector<double> alpha(n, 0.0), grad(n, -1.0);  // grad of 1/2 a'Qa - 1'a
  const double tol = std::min(cfg.tolerance * 1e4, 1e-3);
  const long max_iter = std::max<long>(100000, 100L * static_cast<long>(n));
  long it = 0;
  bool converged = false;
  std::vector<double> ki(n), kj(n);
  for (; it < max_iter; ++it) {
    // Maximal violating pair.
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      const bool up = (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0);
      const bool low = (y[t] < 0 && alpha[t] < C) || (y[t] > 0 && alpha[t] > 0);
      if (up && v > gmax) {
        gmax = v;
        i = t;
      }
      if (low && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (i == n || j == n || gmax - gmin < tol) {
      converged = true;
      break;
    }
    std::copy_n(krow(i), n, ki.begin());
    std::copy_n(krow(j), n, kj.begin());
    const double eta = std::max(ki[i] + kj[j] - 2.0 * ki[j], 1e-12);
    // Move along y_i e_i - y_j e_j, clipped to the box.
    double step = (gmax - gmin) / eta;
    const double room_i = y[i] > 0 ? C - alpha[i] : alpha[i];
    const double room_j = y[j] > 0 ? alpha[j] : C - alpha[j];
    step = std::min({step, room_i, room_j});
    const double di = y[i] * step, dj = -y[j] * step;
    alpha[i] = std::clamp(alpha[i] + di, 0.0, C);
    alpha[j] = std::clamp(alpha[j] + dj, 0.0, C);
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[i] * di * ki[t] + y[j] * dj * kj[t]);
    }
  }

  // Bias from free support vectors, else the midpoint of the feasible range.
  double sum = 0.0, ub = std::numeric_limits<double>::infinity(),
         lb = -std::numeric_limits<double>::infinity();
  int free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double v = -y[t] * grad[t];
    if (alpha[t] > 0 && alpha[t] < C) {
      sum += v;
      ++free_count;
    } else {
      const bool in_up = (y[t] > 0) == (alpha[t] < C);
      if (in_up) lb = std::max(lb, v);
      else ub = std::min(ub, v);
    }
  }
  double beta = free_count > 0 ? sum / free_count : 0.0;
  if (free_count == 0) {
    if (std::isfinite(lb) && std::isfinite(ub)) beta = 0.5 * (lb + ub);
    else if (std::isfinite(lb)) beta = lb;
    else if (std::isfinite(ub)) beta = ub;
  }

  SVM s;
  s.kernel = kernel;
  s.beta = beta;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0) {
      s.dual_alphas.push_back(alpha[t] * y[t]);
      s.support_vectors.push_back(rows[t].x);
    }
  }
  if (info) {
    info->box_c = C;
    info->alphas = alpha;
    info->signs.resize(n);
    for (std::size_t t = 0; t < n; ++t) info->signs[t] = y[t] > 0 ? 1 : -1;
    info->iterations = static_cast<int>(it);
    info->converged = converged;
  }
  return s;
}

}  // namespace

SVM fit_svm_rows(const Kernel& kernel, const std::vector<LabeledPoint>& rows,
                 const OptimizerConfig& cfg, SvmFitInfo* info) {
  if (rows.empty()) throw std::invalid_argument("fit_svm: no training rows");
  bool seen[2] = {false, false};
  for (const auto& r : rows) {
    if (r.y != 0 && r.y != 1) throw std::invalid_argument("fit_svm needs binary labels");
    seen[r.y] = true;
  }
  if (!seen[0] || !seen[1]) throw std::invalid_argument("fit_svm needs both classes present");
  if (const auto* p = std::get_if<PolyKernel>(&kernel); p && p->degree < 2) {
    throw std::invalid_argument("polynomial kernel degree must be at least 2");
  }
  if (std::holds_alternative<LinearKernel>(kernel)) return fit_linear(rows, cfg, info);
  return fit_smo(kernel, rows, cfg, info);
}

SVM fit_svm(const Kernel& kernel, const Dataset& data, const OptimizerConfig& cfg,
            SvmFitInfo* info) {
  if (data.classes != 2) throw std::invalid_argument("fit_svm needs binary data");
  return fit_svm_rows(kernel, data.train_rows(), cfg, info);
}

}  // namespace mexlab
