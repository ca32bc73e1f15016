#include "mexlab/attacks/report.hpp"

namespace mexlab {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

json report_to_json(const ExtractionReport& r) {
  return {{"kind", r.kind},
          {"alpha", r.alpha},
          {"queries_used", r.queries_used},
          {"r_test", r.r_test},
          {"r_unif", r.r_unif},
          {"r_test_tv", opt(r.r_test_tv)},
          {"r_unif_tv", opt(r.r_unif_tv)},
          {"wall_time_ms", r.wall_time_ms},
          {"seed", r.seed}};
}

ExtractionReport report_from_json(const json& j) {
  ExtractionReport r;
  r.kind = j.at("kind").get<std::string>();
  r.alpha = j.value("alpha", 0.0);
  r.queries_used = j.at("queries_used").get<std::size_t>();
  r.r_test = j.at("r_test").get<double>();
  r.r_unif = j.at("r_unif").get<double>();
  r.r_test_tv = opt_from(j, "r_test_tv");
  r.r_unif_tv = opt_from(j, "r_unif_tv");
  r.wall_time_ms = j.value("wall_time_ms", 0.0);
  r.seed = j.value("seed", std::uint64_t{0});
  return r;
}

void score_extraction(ExtractionReport& r, const Predictor& f, const Predictor& fhat,
                      const Dataset* data, const FeatureSpace& space, std::size_t n_unif,
                      std::uint64_t seed) {
  const bool tv = f.proba && fhat.proba;
  const auto pts = uniform_points(space, n_unif, seed);
  r.r_unif = mean_error(f, fhat, pts, ErrorMode::Labels);
  r.r_unif_tv = tv ? std::optional(mean_error(f, fhat, pts, ErrorMode::TotalVariation)) : std::nullopt;
  if (data && !data->test.empty()) {
    r.r_test = r_test(f, fhat, *data, ErrorMode::Labels);
    r.r_test_tv = tv ? std::optional(r_test(f, fhat, *data, ErrorMode::TotalVariation)) : std::nullopt;
  } else {
    r.r_test = r.r_unif;
    r.r_test_tv = r.r_unif_tv;
  }
}

}  // namespace mexlab
