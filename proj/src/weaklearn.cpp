#include "mrboost/weaklearn.hpp"

#include <cmath>
#include <stdexcept>

#include "mrboost/game.hpp"

namespace mrb {

std::string to_string(WlCondition condition) {
  return condition == WlCondition::mrboost ? "MRBoost" : "RobBoost";
}

namespace {

WlCertificate certify(WlCondition condition, const std::vector<Vector>& edge,
                      std::size_t lp_cap) {
  const GameSolution s = solve_zero_sum(edge, lp_cap);
  WlCertificate cert;
  cert.condition = condition;
  cert.gamma = s.value;
  cert.witness_distribution = s.col_strategy;
  if (cert.gamma > 0.0) {
    std::size_t best = 0;
    double best_edge = -2.0;
    for (std::size_t h = 0; h < edge.size(); ++h) {
      double v = 0.0;
      for (std::size_t e = 0; e < edge[h].size(); ++e) {
        v += edge[h][e] * cert.witness_distribution[e];
      }
      if (v > best_edge) {
        best_edge = v;
        best = h;
      }
    }
    cert.witness_hypothesis = best;
  }
  return cert;
}

}  // namespace

WlCertificate wl_mrboost_value(const PredictionTable& table,
                               const LabeledDataset& dataset,
                               const PerturbationModel& perturbations,
                               std::size_t lp_cap) {
  const PayoffMatrix payoffs =
      build_payoff_matrix(table, build_augmented_space(dataset, perturbations));
  const MarginGameValue v = matrix_game_value_lp(payoffs, lp_cap);
  WlCertificate cert;
  cert.condition = WlCondition::mrboost;
  cert.gamma = v.value;
  cert.witness_distribution = v.p;
  if (cert.gamma > 0.0) cert.witness_hypothesis = best_response(payoffs, v.p);
  return cert;
}

std::vector<Vector> robboost_payoff(const PredictionTable& table,
                                    const LabeledDataset& dataset) {
  if (table.num_samples() != dataset.size()) {
    throw std::invalid_argument("robboost payoff: table and dataset differ in size");
  }
  const int k = dataset.num_classes();
  std::vector<Vector> edge(table.num_hypotheses());
  for (std::size_t h = 0; h < table.num_hypotheses(); ++h) {
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const int y = dataset.y(i);
      bool always_correct = true;
      std::vector<bool> hits(k, false);
      for (std::size_t g = 0; g < table.num_perturbations(); ++g) {
        const int pred = table.at(h, i, g);
        always_correct = always_correct && pred == y;
        hits[pred] = true;
      }
      for (int yp = 0; yp < k; ++yp) {
        if (yp == y) continue;
        edge[h].push_back((always_correct ? 1.0 : 0.0) - (hits[yp] ? 1.0 : 0.0));
      }
    }
  }
  return edge;
}

WlCertificate wl_robboost_value(const PredictionTable& table,
                                const LabeledDataset& dataset, std::size_t lp_cap) {
  return certify(WlCondition::robboost, robboost_payoff(table, dataset), lp_cap);
}

IntervalFixture interval_class_fixture(double grid_step) {
  if (!(grid_step > 0.0) || grid_step > 0.1 + 1e-12) {
    throw std::invalid_argument("interval fixture: grid_step must be in (0, 0.1]");
  }
  std::vector<IntervalClassifier> intervals;
  for (long j = 0;; ++j) {
    const double theta = -1.0 + static_cast<double>(j) * grid_step;
    if (theta > 0.9 + 1e-9) break;
    intervals.push_back({theta, 0.1, 0, 1});
  }
  return {FiniteHypothesisClass::intervals(2, std::move(intervals)),
          LabeledDataset({Vector{0.0}}, {1}, 2),
          PerturbationModel::uniform_grid_1d(1.0, grid_step)};
}

}  // namespace mrb
