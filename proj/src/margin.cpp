#include "mrboost/margin.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace mrb {

int pairwise_margin_loss(int predicted, int y, int y_prime) {
  if (y == y_prime) throw std::invalid_argument("pairwise margin loss: y == y'");
  return static_cast<int>(predicted != y) - static_cast<int>(predicted != y_prime);
}

double ensemble_margin(std::span<const double> score, int y) {
  if (score.size() < 2) throw std::invalid_argument("ensemble margin: K < 2");
  if (y < 0 || static_cast<std::size_t>(y) >= score.size()) {
    throw std::invalid_argument("ensemble margin: label out of range");
  }
  double rival = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < score.size(); ++j) {
    if (static_cast<int>(j) != y) rival = std::max(rival, score[j]);
  }
  return score[y] - rival;
}

MarginReport margin_report(const PredictionTable& table, const EnsembleWeights& q,
                           const LabeledDataset& dataset,
                           std::size_t zero_perturbation) {
  if (table.num_samples() != dataset.size()) {
    throw std::invalid_argument("margin report: table and dataset differ in size");
  }
  MarginReport report;
  report.per_sample_min_margin.assign(dataset.size(),
                                      std::numeric_limits<double>::infinity());
  std::size_t robust = 0, clean = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    double& worst = report.per_sample_min_margin[i];
    for (std::size_t g = 0; g < table.num_perturbations(); ++g) {
      const double m = ensemble_margin(ensemble_score(table, q, i, g), dataset.y(i));
      worst = std::min(worst, m);
      if (g == zero_perturbation && m > 0.0) ++clean;
    }
    if (worst > 0.0) ++robust;
  }
  const double n = static_cast<double>(dataset.size());
  report.min_robust_margin = *std::min_element(report.per_sample_min_margin.begin(),
                                               report.per_sample_min_margin.end());
  report.adversarial_accuracy = robust / n;
  report.clean_accuracy = zero_perturbation < table.num_perturbations()
                              ? clean / n
                              : std::numeric_limits<double>::quiet_NaN();
  return report;
}

double min_robust_margin(const PredictionTable& table, const EnsembleWeights& q,
                         const LabeledDataset& dataset) {
  return margin_report(table, q, dataset, table.num_perturbations()).min_robust_margin;
}

double min_robust_margin(const FiniteHypothesisClass& hypotheses,
                         const EnsembleWeights& q, const LabeledDataset& dataset,
                         const PerturbationModel& perturbations) {
  if (!perturbations.is_grid()) {
    throw std::invalid_argument(
        "min robust margin: continuous perturbations cannot be minimized exactly");
  }
  return min_robust_margin(tabulate(hypotheses, dataset, perturbations), q, dataset);
}

double robust_accuracy(const PredictionTable& table, const EnsembleWeights& q,
                       const LabeledDataset& dataset) {
  return margin_report(table, q, dataset, table.num_perturbations())
      .adversarial_accuracy;
}

double robust_accuracy(const FiniteHypothesisClass& hypotheses,
                       const EnsembleWeights& q, const LabeledDataset& dataset,
                       const PerturbationModel& perturbations) {
  if (!perturbations.is_grid()) {
    throw std::invalid_argument(
        "robust accuracy: continuous perturbations need the attack evaluator");
  }
  return robust_accuracy(tabulate(hypotheses, dataset, perturbations), q, dataset);
}

}  // namespace mrb
