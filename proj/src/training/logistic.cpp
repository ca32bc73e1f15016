#include "mexlab/training/logistic.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mexlab/core/rng.hpp"
#include "mexlab/models/predict.hpp"

namespace mexlab {

namespace {

constexpr double kClamp = 1e-12;

double neg_log(double p) { return -std::log(std::max(p, kClamp)); }

void add_outer(Weights& g, const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) g[i][j] += a[i] * b[j];
  }
}

std::vector<double> affine(const Weights& w, const std::vector<double>& b,
                           const std::vector<double>& x) {
  std::vector<double> z(b);
  for (std::size_t i = 0; i < w.size(); ++i) {
    z[i] += std::inner_product(w[i].begin(), w[i].end(), x.begin(), 0.0);
  }
  return z;
}

// Loss of one sample and d loss / d z for softmax outputs.
double softmax_head(const std::vector<double>& z, const ProbVector& t, std::vector<double>& dz) {
  const ProbVector p = softmax(z);
  double loss = 0.0, live = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (t[k] == 0.0) continue;
    loss += t[k] * neg_log(p[k]);
    if (p[k] > kClamp) live += t[k];
  }
  for (std::size_t k = 0; k < p.size(); ++k) {
    dz[k] = p[k] * live - (p[k] > kClamp ? t[k] : 0.0);
  }
  return loss;
}

double sq_norm(const Weights& w) {
  double s = 0.0;
  for (const auto& r : w)
    for (double v : r) s += v * v;
  return s;
}

void add_ridge(Weights& g, const Weights& w, double lambda) {
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w[i].size(); ++j) g[i][j] += 2.0 * lambda * w[i][j];
}

void scale(Weights& g, double s) {
  for (auto& r : g)
    for (double& v : r) v *= s;
}

void scale(std::vector<double>& g, double s) {
  for (double& v : g) v *= s;
}

Weights zeros_like(const Weights& w) {
  Weights z(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) z[i].assign(w[i].size(), 0.0);
  return z;
}

template <class F>
void for_each_sample(const std::vector<Target>& targets, const std::vector<std::size_t>* batch,
                     F&& f) {
  if (batch) {
    for (std::size_t i : *batch) f(targets[i]);
  } else {
    for (const auto& t : targets) f(t);
  }
}

void check_target(const Target& t, std::size_t classes) {
  if (t.t.size() != classes) {
    throw std::invalid_argument("target has " + std::to_string(t.t.size()) +
                                " classes, model has " + std::to_string(classes));
  }
}

// Computes the loss and, when g is non-null, fills it with a gradient shaped
// like m.
double evaluate(const ModelSpec& m, const std::vector<Target>& targets, double lambda,
                ModelSpec* g, const std::vector<std::size_t>* batch) {
  const std::size_t count = batch ? batch->size() : targets.size();
  if (count == 0) throw std::invalid_argument("cross-entropy over an empty target set");
  const double inv = 1.0 / static_cast<double>(count);
  double loss = 0.0;

  if (const auto* lr = std::get_if<BinaryLR>(&m)) {
    BinaryLR grad{std::vector<double>(lr->w.size(), 0.0), 0.0};
    for_each_sample(targets, batch, [&](const Target& s) {
      check_target(s, 2);
      const double z =
          lr->beta + std::inner_product(lr->w.begin(), lr->w.end(), s.x.begin(), 0.0);
      const double p1 = sigmoid(z), p0 = sigmoid(-z);
      loss += s.t[0] * neg_log(p0) + s.t[1] * neg_log(p1);
      if (!g) return;
      const double dz = (p0 > kClamp ? s.t[0] * p1 : 0.0) - (p1 > kClamp ? s.t[1] * p0 : 0.0);
      for (std::size_t j = 0; j < s.x.size(); ++j) grad.w[j] += dz * s.x[j];
      grad.beta += dz;
    });
    loss = loss * inv + lambda * std::inner_product(lr->w.begin(), lr->w.end(), lr->w.begin(), 0.0);
    if (g) {
      scale(grad.w, inv);
      grad.beta *= inv;
      for (std::size_t j = 0; j < grad.w.size(); ++j) grad.w[j] += 2.0 * lambda * lr->w[j];
      *g = std::move(grad);
    }
    return loss;
  }

  if (const auto* sm = std::get_if<SoftmaxLR>(&m)) {
    SoftmaxLR grad{zeros_like(sm->w), std::vector<double>(sm->betas.size(), 0.0)};
    std::vector<double> dz(sm->betas.size());
    for_each_sample(targets, batch, [&](const Target& s) {
      check_target(s, sm->betas.size());
      loss += softmax_head(affine(sm->w, sm->betas, s.x), s.t, dz);
      if (!g) return;
      add_outer(grad.w, dz, s.x);
      for (std::size_t k = 0; k < dz.size(); ++k) grad.betas[k] += dz[k];
    });
    loss = loss * inv + lambda * sq_norm(sm->w);
    if (g) {
      scale(grad.w, inv);
      scale(grad.betas, inv);
      add_ridge(grad.w, sm->w, lambda);
      *g = std::move(grad);
    }
    return loss;
  }

  if (const auto* ovr = std::get_if<OvRLR>(&m)) {
    const std::size_t c = ovr->betas.size();
    OvRLR grad{zeros_like(ovr->w), std::vector<double>(c, 0.0)};
    std::vector<double> sig(c), comp(c), dz(c);
    for_each_sample(targets, batch, [&](const Target& s) {
      check_target(s, c);
      const auto z = affine(ovr->w, ovr->betas, s.x);
      double total = 0.0;
      for (std::size_t k = 0; k < c; ++k) {
        sig[k] = std::max(sigmoid(z[k]), 1e-300);
        comp[k] = sigmoid(-z[k]);
        total += sig[k];
      }
      double live = 0.0;
      for (std::size_t k = 0; k < c; ++k) {
        const double p = sig[k] / total;
        if (s.t[k] != 0.0) loss += s.t[k] * neg_log(p);
        if (p > kClamp) live += s.t[k];
      }
      if (!g) return;
      for (std::size_t k = 0; k < c; ++k) {
        const double p = sig[k] / total;
        dz[k] = comp[k] * (sig[k] * live / total - (p > kClamp ? s.t[k] : 0.0));
      }
      add_outer(grad.w, dz, s.x);
      for (std::size_t k = 0; k < c; ++k) grad.betas[k] += dz[k];
    });
    loss = loss * inv + lambda * sq_norm(ovr->w);
    if (g) {
      scale(grad.w, inv);
      scale(grad.betas, inv);
      add_ridge(grad.w, ovr->w, lambda);
      *g = std::move(grad);
    }
    return loss;
  }

  if (const auto* mlp = std::get_if<MLP>(&m)) {
    const std::size_t h = mlp->b1.size(), c = mlp->b2.size();
    MLP grad{zeros_like(mlp->w1), std::vector<double>(h, 0.0), zeros_like(mlp->w2),
             std::vector<double>(c, 0.0)};
    std::vector<double> dz(c), da(h);
    for_each_sample(targets, batch, [&](const Target& s) {
      check_target(s, c);
      auto hid = affine(mlp->w1, mlp->b1, s.x);
      for (double& v : hid) v = std::tanh(v);
      loss += softmax_head(affine(mlp->w2, mlp->b2, hid), s.t, dz);
      if (!g) return;
      add_outer(grad.w2, dz, hid);
      for (std::size_t k = 0; k < c; ++k) grad.b2[k] += dz[k];
      for (std::size_t u = 0; u < h; ++u) {
        double back = 0.0;
        for (std::size_t k = 0; k < c; ++k) back += mlp->w2[k][u] * dz[k];
        da[u] = back * (1.0 - hid[u] * hid[u]);
        grad.b1[u] += da[u];
      }
      add_outer(grad.w1, da, s.x);
    });
    loss = loss * inv + lambda * (sq_norm(mlp->w1) + sq_norm(mlp->w2));
    if (g) {
      scale(grad.w1, inv);
      scale(grad.b1, inv);
      scale(grad.w2, inv);
      scale(grad.b2, inv);
      add_ridge(grad.w1, mlp->w1, lambda);
      add_ridge(grad.w2, mlp->w2, lambda);
      *g = std::move(grad);
    }
    return loss;
  }

  if (const auto* klr = std::get_if<KernelLR>(&m)) {
    const std::size_t c = klr->betas.size(), sr = klr->representers.size();
    for (const auto& row : klr->alphas) {
      if (row.size() != sr) throw std::invalid_argument("KernelLR: alphas do not match representers");
    }
    KernelLR grad{zeros_like(klr->alphas), std::vector<double>(c, 0.0),
                  std::vector<Point>(sr), klr->gamma};
    for (std::size_t r = 0; r < sr; ++r) grad.representers[r].assign(klr->representers[r].size(), 0.0);
    std::vector<double> kv(sr), dz(c);
    for_each_sample(targets, batch, [&](const Target& s) {
      check_target(s, c);
      for (std::size_t r = 0; r < sr; ++r) kv[r] = rbf(s.x, klr->representers[r], klr->gamma);
      loss += softmax_head(affine(klr->alphas, klr->betas, kv), s.t, dz);
      if (!g) return;
      add_outer(grad.alphas, dz, kv);
      for (std::size_t k = 0; k < c; ++k) grad.betas[k] += dz[k];
      for (std::size_t r = 0; r < sr; ++r) {
        double dk = 0.0;
        for (std::size_t k = 0; k < c; ++k) dk += dz[k] * klr->alphas[k][r];
        const double f = dk * kv[r] * 2.0 * klr->gamma;
        if (f == 0.0) continue;
        auto& gr = grad.representers[r];
        for (std::size_t j = 0; j < gr.size(); ++j) gr[j] += f * (s.x[j] - klr->representers[r][j]);
      }
    });
    loss = loss * inv + lambda * sq_norm(klr->alphas);
    if (g) {
      scale(grad.alphas, inv);
      scale(grad.betas, inv);
      for (auto& r : grad.representers) scale(r, inv);
      add_ridge(grad.alphas, klr->alphas, lambda);
      *g = std::move(grad);
    }
    return loss;
  }

  throw std::invalid_argument("cross-entropy is defined for logistic-family models only");
}

void append(std::vector<double>& out, const Weights& w) {
  for (const auto& r : w) out.insert(out.end(), r.begin(), r.end());
}

void take(const std::vector<double>& flat, std::size_t& pos, Weights& w) {
  for (auto& r : w)
    for (double& v : r) v = flat.at(pos++);
}

void take(const std::vector<double>& flat, std::size_t& pos, std::vector<double>& w) {
  for (double& v : w) v = flat.at(pos++);
}

}  // namespace

std::vector<Target> one_hot_targets(const std::vector<LabeledPoint>& rows, int classes) {
  std::vector<Target> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.y < 0 || r.y >= classes) throw std::out_of_range("class index out of range");
    ProbVector t(classes, 0.0);
    t[r.y] = 1.0;
    out.push_back({r.x, std::move(t)});
  }
  return out;
}

const char* family_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::BinaryLR:
      return "binary_lr";
    case FamilyKind::Softmax:
      return "softmax";
    case FamilyKind::OvR:
      return "ovr";
    case FamilyKind::MLP:
      return "mlp";
    case FamilyKind::KernelLR:
      return "kernel_lr";
  }
  return "?";
}

FamilyKind family_from_name(const std::string& name) {
  for (auto k : {FamilyKind::BinaryLR, FamilyKind::Softmax, FamilyKind::OvR, FamilyKind::MLP,
                 FamilyKind::KernelLR}) {
    if (name == family_name(k)) return k;
  }
  throw std::invalid_argument("unknown logistic-family kind: " + name);
}

double cross_entropy_loss(const ModelSpec& m, const std::vector<Target>& targets,
                          double l2_lambda) {
  return evaluate(m, targets, l2_lambda, nullptr, nullptr);
}

ModelSpec loss_gradient(const ModelSpec& m, const std::vector<Target>& targets, double l2_lambda) {
  ModelSpec g = m;
  evaluate(m, targets, l2_lambda, &g, nullptr);
  return g;
}

double loss_and_gradient(const ModelSpec& m, const std::vector<Target>& targets,
                         double l2_lambda, std::vector<double>* grad,
                         const std::vector<std::size_t>* batch) {
  if (!grad) return evaluate(m, targets, l2_lambda, nullptr, batch);
  ModelSpec g = m;
  const double loss = evaluate(m, targets, l2_lambda, &g, batch);
  *grad = flatten(g);
  return loss;
}

std::vector<double> flatten(const ModelSpec& m) {
  std::vector<double> out;
  if (const auto* s = std::get_if<BinaryLR>(&m)) {
    out = s->w;
    out.push_back(s->beta);
  } else if (const auto* s = std::get_if<SoftmaxLR>(&m)) {
    append(out, s->w);
    out.insert(out.end(), s->betas.begin(), s->betas.end());
  } else if (const auto* s = std::get_if<OvRLR>(&m)) {
    append(out, s->w);
    out.insert(out.end(), s->betas.begin(), s->betas.end());
  } else if (const auto* s = std::get_if<MLP>(&m)) {
    append(out, s->w1);
    out.insert(out.end(), s->b1.begin(), s->b1.end());
    append(out, s->w2);
    out.insert(out.end(), s->b2.begin(), s->b2.end());
  } else if (const auto* s = std::get_if<KernelLR>(&m)) {
    append(out, s->alphas);
    out.insert(out.end(), s->betas.begin(), s->betas.end());
    append(out, s->representers);
  } else {
    throw std::invalid_argument("flatten: not a logistic-family model");
  }
  return out;
}

ModelSpec unflatten(const ModelSpec& shape, const std::vector<double>& flat) {
  ModelSpec m = shape;
  std::size_t pos = 0;
  if (auto* s = std::get_if<BinaryLR>(&m)) {
    take(flat, pos, s->w);
    s->beta = flat.at(pos++);
  } else if (auto* s = std::get_if<SoftmaxLR>(&m)) {
    take(flat, pos, s->w);
    take(flat, pos, s->betas);
  } else if (auto* s = std::get_if<OvRLR>(&m)) {
    take(flat, pos, s->w);
    take(flat, pos, s->betas);
  } else if (auto* s = std::get_if<MLP>(&m)) {
    take(flat, pos, s->w1);
    take(flat, pos, s->b1);
    take(flat, pos, s->w2);
    take(flat, pos, s->b2);
  } else if (auto* s = std::get_if<KernelLR>(&m)) {
    take(flat, pos, s->alphas);
    take(flat, pos, s->betas);
    take(flat, pos, s->representers);
  } else {
    throw std::invalid_argument("unflatten: not a logistic-family model");
  }
  if (pos != flat.size()) throw std::invalid_argument("unflatten: parameter count mismatch");
  return m;
}

ModelSpec initial_model(FamilyKind kind, std::size_t d, int classes, const FamilyOptions& opt,
                        std::uint64_t seed) {
  Rng rng(seed);
  auto mat = [&](std::size_t r, std::size_t c) {
    Weights w(r, std::vector<double>(c));
    for (auto& row : w)
      for (double& v : row) v = rng.normal(0.0, opt.init_scale);
    return w;
  };
  const auto c = static_cast<std::size_t>(classes);
  switch (kind) {
    case FamilyKind::BinaryLR:
      return BinaryLR{mat(1, d)[0], 0.0};
    case FamilyKind::Softmax:
      return SoftmaxLR{mat(c, d), std::vector<double>(c, 0.0)};
    case FamilyKind::OvR:
      return OvRLR{mat(c, d), std::vector<double>(c, 0.0)};
    case FamilyKind::MLP: {
      if (opt.hidden < 1) throw std::invalid_argument("an MLP needs at least one hidden unit");
      const auto h = static_cast<std::size_t>(opt.hidden);
      // Hidden weights scaled by 1/sqrt(d) keep tanh out of saturation.
      Weights w1(h, std::vector<double>(d));
      for (auto& row : w1)
        for (double& v : row) v = rng.normal(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
      std::vector<double> b1(h);
      for (double& v : b1) v = rng.normal(0.0, 0.1);
      Weights w2(c, std::vector<double>(h));
      for (auto& row : w2)
        for (double& v : row) v = rng.normal(0.0, 1.0 / std::sqrt(static_cast<double>(h)));
      return MLP{std::move(w1), std::move(b1), std::move(w2), std::vector<double>(c, 0.0)};
    }
    case FamilyKind::KernelLR: {
      if (opt.representers < 1) throw std::invalid_argument("KernelLR needs a representer");
      if (!(opt.gamma > 0)) throw std::invalid_argument("KernelLR gamma must be positive");
      return KernelLR{mat(c, static_cast<std::size_t>(opt.representers)),
                      std::vector<double>(c, 0.0), {}, opt.gamma};
    }
  }
  throw std::invalid_argument("unknown family");
}

FitResult fit_to_targets(const ModelSpec& init, const std::vector<Target>& targets,
                         const OptimizerConfig& cfg, bool train_representers) {
  if (targets.empty()) throw std::invalid_argument("no training targets");
  std::size_t frozen_from = std::numeric_limits<std::size_t>::max();
  if (const auto* k = std::get_if<KernelLR>(&init); k && !train_representers) {
    frozen_from = k->alphas.size() * k->representers.size() + k->betas.size();
  }
  Objective obj = [&](const std::vector<double>& x, std::vector<double>* grad,
                      const std::vector<std::size_t>* batch) {
    const double loss =
        loss_and_gradient(unflatten(init, x), targets, cfg.l2_lambda, grad, batch);
    if (grad) {
      for (std::size_t i = frozen_from; i < grad->size(); ++i) (*grad)[i] = 0.0;
    }
    return loss;
  };
  std::vector<double> x = flatten(init);
  LossReport rep = minimize(obj, x, cfg, targets.size());
  return {unflatten(init, x), rep};
}

FitResult fit_logistic_family(FamilyKind kind, const Dataset& data, const OptimizerConfig& cfg,
                              const FamilyOptions& opt) {
  const auto rows = data.train_rows();
  if (rows.empty()) throw std::invalid_argument("empty training partition");
  std::vector<int> seen(data.classes, 0);
  int present = 0;
  for (const auto& r : rows) {
    if (r.y < 0 || r.y >= data.classes) throw std::out_of_range("class index out of range");
    if (seen[r.y]++ == 0) ++present;
  }
  if (present < 2) throw std::invalid_argument("training data needs at least two classes");
  if (kind == FamilyKind::BinaryLR && data.classes != 2) {
    throw std::invalid_argument("binary logistic regression needs exactly two classes");
  }
  ModelSpec init = initial_model(kind, data.space.size(), data.classes, opt, cfg.seed);
  if (auto* k = std::get_if<KernelLR>(&init)) {
    // Representers are drawn from the training data.
    std::vector<std::size_t> idx(rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(cfg.seed ^ 0x5bd1e995ULL);
    shuffle(idx, rng);
    const std::size_t s = std::min<std::size_t>(opt.representers, rows.size());
    for (std::size_t r = 0; r < s; ++r) k->representers.push_back(rows[idx[r]].x);
    for (auto& row : k->alphas) row.resize(s);
  }
  return fit_to_targets(init, one_hot_targets(rows, data.classes), cfg, opt.train_representers);
}

}  // namespace mexlab
