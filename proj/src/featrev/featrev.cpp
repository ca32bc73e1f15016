#include "mexlab/featrev/featrev.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mexlab/core/linalg.hpp"
#include "mexlab/core/rng.hpp"
#include "mexlab/models/predict.hpp"

namespace mexlab {

using nlohmann::json;

void FeatureExtractor::validate() const {
  if (dims.size() != input.size()) throw std::invalid_argument("extractor/input dimension mismatch");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const auto where = " on input dim " + std::to_string(i);
    if (const auto* oh = std::get_if<OneHotDim>(&dims[i])) {
      if (input.is_continuous(i) || input.arity(i) != oh->arity) {
        throw std::invalid_argument("one-hot arity does not match" + where);
      }
    } else if (const auto* qb = std::get_if<QuantileBinDim>(&dims[i])) {
      if (!input.is_continuous(i)) throw std::invalid_argument("binning a categorical dim" + where);
      for (std::size_t k = 0; k < qb->boundaries.size(); ++k) {
        const double b = qb->boundaries[k];
        if (!(b >= input.lo(i) && b <= input.hi(i))) {
          throw std::invalid_argument("bin boundary outside the range" + where);
        }
        if (k > 0 && !(qb->boundaries[k - 1] < b)) {
          throw std::invalid_argument("bin boundaries not increasing" + where);
        }
      }
    } else if (!input.is_continuous(i)) {
      throw std::invalid_argument("identity transform of a categorical dim" + where);
    }
  }
}

std::size_t FeatureExtractor::width(std::size_t i) const {
  if (const auto* oh = std::get_if<OneHotDim>(&dims.at(i))) return static_cast<std::size_t>(oh->arity);
  if (const auto* qb = std::get_if<QuantileBinDim>(&dims.at(i))) return qb->boundaries.size() + 1;
  return 1;
}

std::size_t FeatureExtractor::offset(std::size_t i) const {
  std::size_t o = 0;
  for (std::size_t k = 0; k < i; ++k) o += width(k);
  return o;
}

std::size_t FeatureExtractor::output_dim() const { return offset(dims.size()); }

FeatureSpace FeatureExtractor::output_space() const {
  std::vector<FeatureKind> kinds;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (std::holds_alternative<IdentityDim>(dims[i])) {
      kinds.push_back(Continuous{input.lo(i), input.hi(i)});
    } else {
      for (std::size_t k = 0; k < width(i); ++k) kinds.push_back(Continuous{0.0, 1.0});
    }
  }
  return FeatureSpace(kinds);
}

std::size_t bin_index(const std::vector<double>& boundaries, double v) {
  return static_cast<std::size_t>(std::lower_bound(boundaries.begin(), boundaries.end(), v) -
                                  boundaries.begin());
}

Point apply_extractor(const FeatureExtractor& ex, const PartialQuery& m) {
  if (m.size() != ex.dims.size()) throw std::invalid_argument("query/extractor dimension mismatch");
  Point x(ex.output_dim(), 0.0);
  std::size_t o = 0;
  for (std::size_t i = 0; i < ex.dims.size(); ++i) {
    const std::size_t w = ex.width(i);
    if (!m.is_missing(i)) {
      const double v = *m[i];
      if (!ex.input.admits(i, v)) {
        throw std::out_of_range("value " + std::to_string(v) + " outside input dim " + std::to_string(i));
      }
      if (std::holds_alternative<OneHotDim>(ex.dims[i])) {
        x[o + static_cast<std::size_t>(v)] = 1.0;
      } else if (const auto* qb = std::get_if<QuantileBinDim>(&ex.dims[i])) {
        x[o + bin_index(qb->boundaries, v)] = 1.0;
      } else {
        x[o] = v;
      }
    }
    o += w;
  }
  return x;
}

InputTransform as_transform(const FeatureExtractor& ex) {
  ex.validate();
  return [ex](const PartialQuery& m) { return apply_extractor(ex, m); };
}

std::vector<double> fit_quantile_bins(std::vector<double> values, int k) {
  if (k < 1) throw std::invalid_argument("need at least one bin");
  if (values.empty()) throw std::invalid_argument("no values to bin");
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  const std::size_t n = values.size();
  for (int q = 1; q < k; ++q) {
    const double b = values[std::min(n - 1, q * n / static_cast<std::size_t>(k))];
    if (out.empty() || b > out.back()) out.push_back(b);
  }
  // A boundary at the top of the data would leave the last bin empty.
  while (!out.empty() && out.back() >= values.back()) out.pop_back();
  return out;
}

json extractor_to_json(const FeatureExtractor& ex) {
  json dims = json::array();
  for (const auto& d : ex.dims) {
    if (const auto* oh = std::get_if<OneHotDim>(&d)) {
      dims.push_back({{"kind", "one_hot"}, {"arity", oh->arity}});
    } else if (const auto* qb = std::get_if<QuantileBinDim>(&d)) {
      dims.push_back({{"kind", "quantile_bin"}, {"boundaries", qb->boundaries}});
    } else {
      dims.push_back({{"kind", "identity"}});
    }
  }
  json input = json::array();
  for (std::size_t i = 0; i < ex.input.size(); ++i) {
    if (ex.input.is_continuous(i)) {
      input.push_back({{"kind", "continuous"}, {"lo", ex.input.lo(i)}, {"hi", ex.input.hi(i)}});
    } else {
      input.push_back({{"kind", "categorical"}, {"arity", ex.input.arity(i)}});
    }
  }
  return {{"input", std::move(input)}, {"dims", std::move(dims)}};
}

FeatureExtractor extractor_from_json(const json& j) {
  std::vector<FeatureKind> kinds;
  for (const auto& d : j.at("input")) {
    if (d.at("kind") == "continuous") {
      kinds.push_back(Continuous{d.at("lo").get<double>(), d.at("hi").get<double>()});
    } else {
      kinds.push_back(Categorical{d.at("arity").get<int>()});
    }
  }
  FeatureExtractor ex{FeatureSpace(kinds), {}};
  for (const auto& d : j.at("dims")) {
    const auto kind = d.at("kind").get<std::string>();
    if (kind == "one_hot") {
      ex.dims.push_back(OneHotDim{d.at("arity").get<int>()});
    } else if (kind == "quantile_bin") {
      ex.dims.push_back(QuantileBinDim{d.at("boundaries").get<std::vector<double>>()});
    } else if (kind == "identity") {
      ex.dims.push_back(IdentityDim{});
    } else {
      throw std::invalid_argument("unknown extractor kind: " + kind);
    }
  }
  ex.validate();
  return ex;
}

BinSearch recover_bins(QueryOracle& oracle, std::size_t dim, double eps) {
  const FeatureSpace& sp = oracle.space();
  if (!sp.is_continuous(dim)) throw std::invalid_argument("bins live on continuous input dims");
  if (!oracle.policy().allow_partial) {
    throw std::invalid_argument("bin recovery holds the other dims MISSING");
  }
  BinSearch out;
  out.dim = dim;
  out.pieces = line_search(oracle, PartialQuery::missing(sp.size()), dim,
                           {sp.lo(dim), sp.hi(dim), true}, eps, output_key);
  for (std::size_t k = 0; k + 1 < out.pieces.size(); ++k) out.boundaries.push_back(out.pieces[k].hi);
  return out;
}

namespace {

// Per-class scores relative to class 0 (binary: the logit of class 1).
std::vector<double> relative_scores(const OracleResponse& r) {
  if (!r.probs) throw std::invalid_argument("equation solving needs probability outputs");
  const ProbVector& p = *r.probs;
  constexpr double clip = 1e-12;
  std::vector<double> z(p.size() - 1);
  const double l0 = std::log(std::max(p[0], clip));
  for (std::size_t j = 1; j < p.size(); ++j) z[j - 1] = std::log(std::max(p[j], clip)) - l0;
  return z;
}

ModelSpec assemble(const std::vector<std::vector<double>>& w, const std::vector<double>& beta) {
  // w[k] holds the coefficients of class k + 1 relative to class 0.
  if (w.size() == 1) return BinaryLR{w[0], beta[0]};
  SoftmaxLR s;
  s.w.push_back(std::vector<double>(w[0].size(), 0.0));
  s.betas.push_back(0.0);
  for (std::size_t k = 0; k < w.size(); ++k) {
    s.w.push_back(w[k]);
    s.betas.push_back(beta[k]);
  }
  return s;
}

ComposedExtraction dense_extraction(QueryOracle& oracle, const FeatureExtractor& ex,
                                    std::uint64_t seed) {
  const std::size_t dx = ex.output_dim();
  const int c = oracle.classes();
  Rng rng(seed);
  const std::size_t start = oracle.queries();
  const std::size_t m = 2 * (dx + 1);
  Matrix a(m, dx + 1);
  std::vector<std::vector<double>> rhs(c - 1, std::vector<double>(m));
  for (std::size_t r = 0; r < m; ++r) {
    const Point in = oracle.space().sample(rng);
    const Point x = apply_extractor(ex, PartialQuery::complete(in));
    for (std::size_t j = 0; j < dx; ++j) a(r, j) = x[j];
    a(r, dx) = 1.0;
    const auto z = relative_scores(oracle.query(in));
    for (int k = 0; k + 1 < c; ++k) rhs[k][r] = z[k];
  }
  // Indicator blocks sum to the intercept column; the tiny ridge picks one of
  // the equivalent parameterisations.
  std::vector<std::vector<double>> w;
  std::vector<double> beta;
  for (int k = 0; k + 1 < c; ++k) {
    const auto sol = least_squares(a, rhs[k], 1e-10);
    w.emplace_back(sol.begin(), sol.begin() + dx);
    beta.push_back(sol[dx]);
  }
  return {assemble(w, beta), oracle.queries() - start, 0, true};
}

}  // namespace

ComposedExtraction extract_composed_linear(QueryOracle& oracle, const FeatureExtractor& ex,
                                           const std::vector<BinSearch>& searches,
                                           std::uint64_t seed) {
  ex.validate();
  if (oracle.policy().outputs != OutputKind::Probabilities) {
    throw std::invalid_argument("equation solving needs probability outputs");
  }
  if (!(ex.input == oracle.space())) throw std::invalid_argument("extractor input space differs from the oracle's");
  if (!oracle.policy().allow_partial) return dense_extraction(oracle, ex, seed);

  const std::size_t d = ex.dims.size();
  const int c = oracle.classes();
  const std::size_t start = oracle.queries();
  ComposedExtraction out;

  const auto beta = relative_scores(oracle.query(PartialQuery::missing(d)));
  std::vector<std::vector<double>> w(c - 1, std::vector<double>(ex.output_dim(), 0.0));
  auto solve_coord = [&](std::size_t coord, double scale, const OracleResponse& r) {
    const auto z = relative_scores(r);
    for (int k = 0; k + 1 < c; ++k) w[k][coord] = (z[k] - beta[k]) / scale;
  };

  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t o = ex.offset(i);
    if (const auto* oh = std::get_if<OneHotDim>(&ex.dims[i])) {
      for (int v = 0; v < oh->arity; ++v) {
        PartialQuery q = PartialQuery::missing(d);
        q.set(i, v);
        solve_coord(o + static_cast<std::size_t>(v), 1.0, oracle.query(q));
      }
    } else if (const auto* qb = std::get_if<QuantileBinDim>(&ex.dims[i])) {
      const BinSearch* bs = nullptr;
      for (const auto& s : searches) {
        if (s.dim == i) bs = &s;
      }
      std::vector<bool> done(qb->boundaries.size() + 1, false);
      if (bs) {
        for (const auto& p : bs->pieces) {
          const std::size_t b = bin_index(qb->boundaries, p.sample);
          if (done[b]) continue;
          solve_coord(o + b, 1.0, p.response);
          done[b] = true;
          ++out.reused;
        }
      }
      for (std::size_t b = 0; b < done.size(); ++b) {
        if (done[b]) continue;
        // Any value inside the bin activates exactly its indicator.
        const double lo = b == 0 ? ex.input.lo(i) : qb->boundaries[b - 1];
        const double hi = b + 1 == done.size() ? ex.input.hi(i) : qb->boundaries[b];
        PartialQuery q = PartialQuery::missing(d);
        q.set(i, b == 0 ? lo : 0.5 * (lo + hi));
        solve_coord(o + b, 1.0, oracle.query(q));
      }
    } else {
      const double v = std::abs(ex.input.hi(i)) >= std::abs(ex.input.lo(i)) ? ex.input.hi(i) : ex.input.lo(i);
      if (v == 0.0) throw std::invalid_argument("identity dim with an all-zero range");
      PartialQuery q = PartialQuery::missing(d);
      q.set(i, v);
      solve_coord(o, v, oracle.query(q));
    }
  }
  out.model = assemble(w, beta);
  out.queries = oracle.queries() - start;
  return out;
}

}  // namespace mexlab
