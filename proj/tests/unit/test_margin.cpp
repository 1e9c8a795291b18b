#include <doctest.h>

#include <cmath>

#include "mrboost/instances.hpp"
#include "mrboost/margin.hpp"

using namespace mrb;

TEST_CASE("pairwise margin loss takes values -1, 0, 1") {
  CHECK(pairwise_margin_loss(0, 0, 1) == -1);
  CHECK(pairwise_margin_loss(1, 0, 1) == 1);
  CHECK(pairwise_margin_loss(2, 0, 1) == 0);
}

TEST_CASE("ensemble margin is true score minus best rival") {
  CHECK(ensemble_margin(Vector{0.5, 0.3, 0.2}, 0) == doctest::Approx(0.2));
  CHECK(ensemble_margin(Vector{0.5, 0.3, 0.2}, 2) == doctest::Approx(-0.3));
  CHECK_THROWS(ensemble_margin(Vector{1.0}, 0));
}

TEST_CASE("a tie at the true label is not robust") {
  const LabeledDataset data({{0.0}}, {0}, 2);
  const auto grid = PerturbationModel::grid(0.0, {{0.0}});
  const auto h = FiniteHypothesisClass::table(2, {{0}, {1}});
  const auto t = tabulate(h, data, grid);
  CHECK(min_robust_margin(t, EnsembleWeights::uniform(2), data) == 0.0);
  CHECK(robust_accuracy(t, EnsembleWeights::uniform(2), data) == 0.0);
  CHECK(robust_accuracy(t, EnsembleWeights({0.6, 0.4}), data) == 1.0);
}

TEST_CASE("margin report matches an exhaustive recomputation") {
  const auto inst = random_table_instance(5, 3, 7, 4, 11);
  const auto t = tabulate(inst.hypotheses, inst.dataset, inst.perturbations);
  const EnsembleWeights q({0.1, 0.2, 0.05, 0.15, 0.2, 0.2, 0.1});
  const MarginReport r = margin_report(t, q, inst.dataset, 0);
  double worst = 1e9;
  std::size_t robust = 0, clean = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    double sample_worst = 1e9;
    for (std::size_t g = 0; g < 4; ++g) {
      double votes[3] = {0, 0, 0};
      for (std::size_t h = 0; h < 7; ++h) votes[t.at(h, i, g)] += q[h];
      const int y = inst.dataset.y(i);
      double rival = -1;
      for (int j = 0; j < 3; ++j) {
        if (j != y) rival = std::max(rival, votes[j]);
      }
      const double m = votes[y] - rival;
      sample_worst = std::min(sample_worst, m);
      if (g == 0 && m > 0) ++clean;
    }
    CHECK(r.per_sample_min_margin[i] == doctest::Approx(sample_worst));
    worst = std::min(worst, sample_worst);
    if (sample_worst > 0) ++robust;
  }
  CHECK(r.min_robust_margin == doctest::Approx(worst));
  CHECK(r.adversarial_accuracy == doctest::Approx(robust / 5.0));
  CHECK(r.clean_accuracy == doctest::Approx(clean / 5.0));
  CHECK(std::isnan(margin_report(t, q, inst.dataset, 4).clean_accuracy));
}

TEST_CASE("class overloads require a finite grid") {
  const LabeledDataset data({{0.0}}, {0}, 2);
  const auto h = FiniteHypothesisClass::stumps(2, {{0, 0.5, 0, 1}});
  CHECK_THROWS(min_robust_margin(h, EnsembleWeights::uniform(1), data,
                                 PerturbationModel::continuous(0.1)));
  CHECK(robust_accuracy(h, EnsembleWeights::uniform(1), data,
                        PerturbationModel::grid(0.4, {{0.0}, {0.4}})) == 1.0);
  CHECK(robust_accuracy(h, EnsembleWeights::uniform(1), data,
                        PerturbationModel::grid(0.6, {{0.0}, {0.6}})) == 0.0);
}
