#pragma once

#include <optional>
#include <string>

#include "mrboost/core.hpp"
#include "mrboost/lp.hpp"

namespace mrb {

enum class WlCondition { mrboost, robboost };

std::string to_string(WlCondition condition);

/// Best guaranteed edge gamma of a weak learning condition. The condition
/// holds with edge tau iff gamma >= tau.
struct WlCertificate {
  WlCondition condition = WlCondition::mrboost;
  double gamma = 0.0;
  /// Minimizing distribution P' over S_aug (MRBoost) or the reduced set
  /// without perturbations (RobBoost).
  Vector witness_distribution;
  /// Best hypothesis against the witness when gamma > 0.
  std::optional<std::size_t> witness_hypothesis;
};

/// min over P' on S_aug of max_h E[1(h = y) - 1(h = y')].
WlCertificate wl_mrboost_value(const PredictionTable& table,
                               const LabeledDataset& dataset,
                               const PerturbationModel& perturbations,
                               std::size_t lp_cap = kDefaultLpCap);

/// Quantified payoff of hypothesis h on reduced entry (i, y'):
/// 1(for all grid delta: h = y) - 1(exists grid delta: h = y').
std::vector<Vector> robboost_payoff(const PredictionTable& table,
                                    const LabeledDataset& dataset);

/// min over P' on the reduced set of max_h E[quantified payoff].
WlCertificate wl_robboost_value(const PredictionTable& table,
                                const LabeledDataset& dataset,
                                std::size_t lp_cap = kDefaultLpCap);

/// Interval classes h_theta(x) = 0 iff x in [theta, theta + 0.1], with
/// theta on {-1, -1 + step, ..., 0.9}, S = {(0, 1)} and eps = 1 discretized
/// at the same step.
struct IntervalFixture {
  FiniteHypothesisClass hypotheses;
  LabeledDataset dataset;
  PerturbationModel perturbations;
};

IntervalFixture interval_class_fixture(double grid_step);

}  // namespace mrb
