#pragma once

#include <span>

#include "mrboost/core.hpp"

namespace mrb {

/// m(h(x), y, y') = 1(h(x) != y) - 1(h(x) != y'): -1 when the prediction is
/// y, +1 when it is y', 0 otherwise.
int pairwise_margin_loss(int predicted, int y, int y_prime);

/// score[y] minus the best rival score.
double ensemble_margin(std::span<const double> score, int y);

struct MarginReport {
  /// Minimum margin of each sample over all grid perturbations.
  Vector per_sample_min_margin;
  double min_robust_margin = 0.0;
  /// Strict-margin accuracy at the unperturbed inputs; NaN when the grid has
  /// no zero perturbation.
  double clean_accuracy = 0.0;
  /// Fraction of samples whose minimum margin over the grid is > 0.
  double adversarial_accuracy = 0.0;
};

MarginReport margin_report(const PredictionTable& table, const EnsembleWeights& q,
                           const LabeledDataset& dataset,
                           std::size_t zero_perturbation);

double min_robust_margin(const PredictionTable& table, const EnsembleWeights& q,
                         const LabeledDataset& dataset);
double min_robust_margin(const FiniteHypothesisClass& hypotheses,
                         const EnsembleWeights& q, const LabeledDataset& dataset,
                         const PerturbationModel& perturbations);

double robust_accuracy(const PredictionTable& table, const EnsembleWeights& q,
                       const LabeledDataset& dataset);
double robust_accuracy(const FiniteHypothesisClass& hypotheses,
                       const EnsembleWeights& q, const LabeledDataset& dataset,
                       const PerturbationModel& perturbations);

}  // namespace mrb
