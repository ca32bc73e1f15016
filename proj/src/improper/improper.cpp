#include "mexlab/improper/improper.hpp"

#include <chrono>
#include <stdexcept>

namespace mexlab {

ImproperExtraction improper_extract(QueryOracle& oracle, int hidden, const BudgetSpec& budget,
                                    const OptimizerConfig& cfg) {
  if (hidden < 1) throw std::invalid_argument("an MLP surrogate needs at least one hidden unit");
  if (oracle.policy().outputs != OutputKind::Probabilities) {
    throw std::invalid_argument("equation solving needs probability outputs");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t start = oracle.queries();
  FamilyOptions fam;
  fam.hidden = hidden;
  FitResult fit = extract_by_loss_min(FamilyKind::MLP, oracle, budget, cfg, fam);

  ImproperExtraction out;
  out.model = std::get<MLP>(fit.model);
  out.loss = fit.report;
  out.surrogate_params = parameter_count(fit.model);
  out.target_params = family_unknowns(FamilyKind::Softmax, oracle.space().size(), oracle.classes());
  out.param_ratio = static_cast<double>(out.surrogate_params) / static_cast<double>(out.target_params);
  out.report.kind = "improper_mlp";
  out.report.alpha = budget.alpha;
  out.report.queries_used = oracle.queries() - start;
  out.report.seed = cfg.seed;
  out.report.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace mexlab
