#include <doctest.h>

#include "mrboost/weaklearn.hpp"

using namespace mrb;

TEST_CASE("interval fixture layout") {
  const auto fx = interval_class_fixture(0.1);
  CHECK(fx.hypotheses.size() == 20);
  CHECK(fx.perturbations.size() == 21);
  CHECK(fx.dataset.size() == 1);
  CHECK(fx.dataset.y(0) == 1);
  CHECK(fx.hypotheses.interval_list().front().theta == doctest::Approx(-1.0));
  CHECK(fx.hypotheses.interval_list().back().theta == doctest::Approx(0.9));
  CHECK_THROWS(interval_class_fixture(0.0));
  CHECK_THROWS(interval_class_fixture(0.2));
}

TEST_CASE("the MRBoost condition holds on the interval fixture while RobBoost's fails") {
  const auto fx = interval_class_fixture(0.1);
  const auto table = tabulate(fx.hypotheses, fx.dataset, fx.perturbations);
  const auto mr = wl_mrboost_value(table, fx.dataset, fx.perturbations);
  const auto rb = wl_robboost_value(table, fx.dataset);
  CHECK(mr.condition == WlCondition::mrboost);
  CHECK(rb.condition == WlCondition::robboost);
  CHECK(mr.gamma >= 0.2);
  CHECK(rb.gamma <= 0.0);
  CHECK(mr.witness_hypothesis.has_value());
  CHECK_FALSE(rb.witness_hypothesis.has_value());
}

TEST_CASE("a finer grid keeps the separation") {
  const auto fx = interval_class_fixture(0.05);
  const auto table = tabulate(fx.hypotheses, fx.dataset, fx.perturbations);
  CHECK(wl_mrboost_value(table, fx.dataset, fx.perturbations).gamma >= 0.2);
  CHECK(wl_robboost_value(table, fx.dataset).gamma <= 0.0);
}

TEST_CASE("quantified payoff") {
  // Two samples, two perturbations, K = 2.
  const LabeledDataset data({{0.0}, {1.0}}, {0, 1}, 2);
  const auto grid = PerturbationModel::grid(0.1, {{0.0}, {0.1}});
  // h0 right everywhere; h1 right on sample 0 only at g = 0.
  const auto h = FiniteHypothesisClass::table(2, {{0, 0, 1, 1}, {0, 1, 0, 0}});
  const auto t = tabulate(h, data, grid);
  const auto payoff = robboost_payoff(t, data);
  REQUIRE(payoff.size() == 2);
  CHECK(payoff[0] == Vector{1.0, 1.0});
  // Sample 0: not always right, sometimes wrong -> -1. Sample 1: always wrong -> -1.
  CHECK(payoff[1] == Vector{-1.0, -1.0});
  CHECK(wl_robboost_value(t, data).gamma == doctest::Approx(1.0));
  CHECK(to_string(WlCondition::mrboost) == "MRBoost");
}
