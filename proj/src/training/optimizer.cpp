#include "mexlab/training/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>

#include "mexlab/core/rng.hpp"

namespace mexlab {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
  if (!(l2_lambda >= 0)) throw std::invalid_argument("l2_lambda must be non-negative");
  if (momentum < 0 || momentum >= 1) throw std::invalid_argument("momentum must be in [0, 1)");
  if (max_epochs < 0) throw std::invalid_argument("max_epochs must be non-negative");
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

LossReport minimize(const Objective& obj, std::vector<double>& x, const OptimizerConfig& cfg,
                    std::size_t n_samples) {
  cfg.validate();
  switch (cfg.solver) {
    case Solver::GradientDescent:
      return minimize_gd(obj, x, cfg);
    case Solver::Stochastic:
      return minimize_sgd(obj, x, cfg, n_samples);
    case Solver::LBFGS:
      return minimize_lbfgs(obj, x, cfg);
  }
  return {};
}

LossReport minimize_gd(const Objective& obj, std::vector<double>& x, const OptimizerConfig& cfg) {
  const std::size_t n = x.size();
  std::vector<double> g(n), v(n, 0.0), prev = x;
  double lr = cfg.learning_rate;
  double loss = obj(x, &g, nullptr);
  LossReport rep;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rep.epochs_run = epoch + 1;
    if (inf_norm(g) < cfg.tolerance) {
      rep.converged = true;
      break;
    }
    prev = x;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = cfg.momentum * v[i] - lr * g[i];
      x[i] += v[i];
    }
    std::vector<double> g_new(n);
    const double next = obj(x, &g_new, nullptr);
    if (!std::isfinite(next) || next > loss) {
      // Undo the step, drop the velocity and shrink the rate.
      x = prev;
      std::fill(v.begin(), v.end(), 0.0);
      lr *= 0.5;
      if (lr < 1e-14) break;
      continue;
    }
    loss = next;
    g = std::move(g_new);
  }
  if (!rep.converged) rep.converged = inf_norm(g) < cfg.tolerance;
  rep.final_loss = loss;
  return rep;
}

LossReport minimize_sgd(const Objective& obj, std::vector<double>& x, const OptimizerConfig& cfg,
                        std::size_t n_samples) {
  if (n_samples == 0) throw std::invalid_argument("stochastic solver needs the sample count");
  const std::size_t batch = std::clamp<std::size_t>(cfg.batch_size, 1, n_samples);
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(n_samples);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> g(x.size()), v(x.size(), 0.0);
  LossReport rep;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rep.epochs_run = epoch + 1;
    // 1/sqrt decay keeps late epochs from bouncing around the optimum.
    const double lr = cfg.learning_rate / std::sqrt(1.0 + epoch);
    shuffle(order, rng);
    for (std::size_t start = 0; start < n_samples; start += batch) {
      std::vector<std::size_t> idx(order.begin() + start,
                                   order.begin() + std::min(n_samples, start + batch));
      obj(x, &g, &idx);
      for (std::size_t i = 0; i < x.size(); ++i) {
        v[i] = cfg.momentum * v[i] - lr * g[i];
        x[i] += v[i];
      }
    }
  }
  rep.final_loss = obj(x, &g, nullptr);
  rep.converged = inf_norm(g) < cfg.tolerance;
  return rep;
}

LossReport minimize_lbfgs(const Objective& obj, std::vector<double>& x,
                          const OptimizerConfig& cfg, int history) {
  const std::size_t n = x.size();
  std::vector<double> g(n), g_new(n), d(n), x_new(n);
  std::deque<std::vector<double>> ss, ys;
  std::deque<double> rhos;
  double f = obj(x, &g, nullptr);
  LossReport rep;
  int stalled = 0;
  for (int it = 0; it < cfg.max_epochs; ++it) {
    rep.epochs_run = it + 1;
    if (inf_norm(g) < cfg.tolerance) {
      rep.converged = true;
      break;
    }
    // Two-loop recursion for d = -H g.
    d = g;
    std::vector<double> alpha(ss.size());
    for (std::size_t k = ss.size(); k-- > 0;) {
      alpha[k] = rhos[k] * std::inner_product(ss[k].begin(), ss[k].end(), d.begin(), 0.0);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * ys[k][i];
    }
    double scale = 1.0;
    if (!ss.empty()) {
      const auto& s = ss.back();
      const auto& y = ys.back();
      scale = std::inner_product(s.begin(), s.end(), y.begin(), 0.0) /
              std::inner_product(y.begin(), y.end(), y.begin(), 0.0);
    } else {
      scale = 1.0 / std::max(1.0, inf_norm(g));
    }
    for (double& e : d) e *= scale;
    for (std::size_t k = 0; k < ss.size(); ++k) {
      const double beta = rhos[k] * std::inner_product(ys[k].begin(), ys[k].end(), d.begin(), 0.0);
      for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[k] - beta) * ss[k][i];
    }
    for (double& e : d) e = -e;

    double slope = std::inner_product(g.begin(), g.end(), d.begin(), 0.0);
    if (!(slope < 0)) {
      // Not a descent direction: restart from steepest descent.
      ss.clear();
      ys.clear();
      rhos.clear();
      const double sc = 1.0 / std::max(1.0, inf_norm(g));
      for (std::size_t i = 0; i < n; ++i) d[i] = -sc * g[i];
      slope = std::inner_product(g.begin(), g.end(), d.begin(), 0.0);
    }

    // Backtracking line search on the Armijo condition.
    double step = 1.0;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * d[i];
      f_new = obj(x_new, &g_new, nullptr);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (ss.empty()) break;  // even steepest descent cannot improve: precision floor
      ss.clear();
      ys.clear();
      rhos.clear();
      continue;
    }

    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g_new[i] - g[i];
    }
    const double sy = std::inner_product(s.begin(), s.end(), y.begin(), 0.0);
    if (sy > 1e-12 * std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0) *
                               std::inner_product(s.begin(), s.end(), s.begin(), 0.0))) {
      ss.push_back(std::move(s));
      ys.push_back(std::move(y));
      rhos.push_back(1.0 / sy);
      if (static_cast<int>(ss.size()) > history) {
        ss.pop_front();
        ys.pop_front();
        rhos.pop_front();
      }
    }
    stalled = (f - f_new <= 1e-16 * std::max(1.0, std::abs(f))) ? stalled + 1 : 0;
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    if (stalled >= 10) break;
  }
  if (!rep.converged) rep.converged = inf_norm(g) < cfg.tolerance;
  rep.final_loss = f;
  return rep;
}

}  // namespace mexlab
