#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "mrboost/game.hpp"
#include "mrboost/instances.hpp"
#include "mrboost/weaklearn.hpp"

using namespace mrb;

TEST_CASE("exponential weights normalize exp(eta * cumulative loss)") {
  GameState s;
  s.eta = 0.5;
  s.cumulative_loss = {1.0, -1.0};
  const Vector p = exp_weights_distribution(s);
  // Independent long double evaluation.
  const long double a = std::exp(0.5L), b = std::exp(-0.5L);
  CHECK(p[0] == doctest::Approx(static_cast<double>(a / (a + b))).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(static_cast<double>(b / (a + b))).epsilon(1e-14));
  CHECK(p[0] == doctest::Approx(0.7311).epsilon(1e-4));

  s.cumulative_loss = {1e6, 1e6 - 2.0};
  s.eta = 1.0;
  const Vector q = exp_weights_distribution(s);
  CHECK(std::isfinite(q[0]));
  CHECK(q[0] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
}

TEST_CASE("best response breaks ties toward the lowest index") {
  const PayoffMatrix m(3, 2, {1, -1, -1, 1, 0, 0});
  CHECK(best_response(m, Vector{0.5, 0.5}) == 0);
  CHECK(best_response(m, Vector{0.9, 0.1}) == 1);
  CHECK(expected_payoff(m, 0, Vector{0.9, 0.1}) == doctest::Approx(0.8));
}

TEST_CASE("payoff matrix follows the augmented order and honours the cap") {
  const LabeledDataset data({{0.0}}, {0}, 3);
  const auto grid = PerturbationModel::grid(0.0, {{0.0}});
  const auto h = FiniteHypothesisClass::table(3, {{0}, {1}, {2}});
  const PayoffMatrix m = build_payoff_matrix(h, data, grid);
  REQUIRE(m.num_entries() == 2);
  CHECK(m.at(0, 0) == -1);
  CHECK(m.at(1, 0) == 1);
  CHECK(m.at(1, 1) == 0);
  CHECK(m.at(2, 1) == 1);
  CHECK_THROWS_AS(build_payoff_matrix(h, data, grid, 5), std::length_error);
}

TEST_CASE("xi_finite formula") {
  CHECK(xi_finite(1, 1) == doctest::Approx(3.0));
  CHECK(xi_finite(100, 16) == doctest::Approx(3.0 * (std::log(100.0) + 1.0) / 4.0));
}

TEST_CASE("P_t maximizes the KL-regularized objective") {
  std::mt19937_64 rng(3);
  GameState s;
  s.eta = 0.3;
  s.cumulative_loss = {2.0, -1.0, 0.0, 3.0, 1.0};
  const Vector p = exp_weights_distribution(s);
  const double best = kl_regularized_objective(p, s.cumulative_loss, s.eta);
  std::gamma_distribution<double> gamma(0.5, 1.0);
  for (int k = 0; k < 200; ++k) {
    Vector alt(5);
    double sum = 0;
    for (double& v : alt) sum += (v = gamma(rng));
    for (double& v : alt) v /= sum;
    CHECK(kl_regularized_objective(alt, s.cumulative_loss, s.eta) <= best + 1e-12);
  }
  CHECK(kl_from_uniform(Vector{0.25, 0.25, 0.25, 0.25}) == doctest::Approx(0.0));
  CHECK(kl_from_uniform(Vector{1.0, 0.0}) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("margin game value on tiny instances") {
  // One sample, two classes, a single hypothesis that is always right.
  const LabeledDataset data({{0.0}}, {0}, 2);
  const auto grid = PerturbationModel::grid(0.0, {{0.0}});
  const auto right = build_payoff_matrix(FiniteHypothesisClass::table(2, {{0}}), data, grid);
  CHECK(matrix_game_value_lp(right).value == doctest::Approx(1.0));
  const auto split =
      build_payoff_matrix(FiniteHypothesisClass::table(2, {{0}, {1}}), data, grid);
  CHECK(matrix_game_value_lp(split).value == doctest::Approx(1.0));
  const auto wrong = build_payoff_matrix(FiniteHypothesisClass::table(2, {{1}}), data, grid);
  CHECK(matrix_game_value_lp(wrong).value == doctest::Approx(-1.0));
}

TEST_CASE("mrboost certificate brackets the LP value") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto inst = random_table_instance(4, 3, 12, 3, seed);
    const auto r = mrboost_run(inst.hypotheses, inst.dataset, inst.perturbations, 64);
    REQUIRE(r.certificate.lp_value.has_value());
    CHECK(r.certificate.lower <= *r.certificate.lp_value + 1e-9);
    CHECK(r.certificate.upper >= *r.certificate.lp_value - 1e-9);
    CHECK(r.certificate.gap >= -1e-9);
    CHECK(r.rounds.size() == 64);
    CHECK(r.chosen.size() == 64);
    CHECK(r.eta == doctest::Approx(1.0 / 16.0));
    double sum = 0;
    for (double v : r.p_average) sum += v;
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("with only the zero perturbation the game reduces to clean boosting") {
  const LabeledDataset data({{0.0}, {1.0}, {2.0}}, {0, 1, 0}, 2);
  const auto grid = PerturbationModel::grid(0.0, {{0.0}});
  const auto h = FiniteHypothesisClass::table(2, {{0, 1, 1}, {0, 0, 0}, {1, 1, 0}});
  const auto r = mrboost_run(h, data, grid, 256);
  CHECK(r.final_report.clean_accuracy == r.final_report.adversarial_accuracy);
  CHECK(r.final_report.adversarial_accuracy == 1.0);
  CHECK(r.certificate.gap <= xi_finite(3, 256));
}

TEST_CASE("mrboost rejects a continuous ball and T = 0") {
  const auto fx = interval_class_fixture(0.1);
  CHECK_THROWS(mrboost_run(fx.hypotheses, fx.dataset, PerturbationModel::continuous(1.0), 4));
  CHECK_THROWS(mrboost_run(fx.hypotheses, fx.dataset, fx.perturbations, 0));
}

TEST_CASE("regret harness on a fixed sequence") {
  // Two actions; action 1 is always better by 1.
  std::vector<Vector> losses(100, Vector{1.0, 0.0});
  const auto r = exp_weights_regret_harness(losses, 0.05, 1.0);
  CHECK(r.rounds == 100);
  CHECK(r.eta_within_guarantee);
  CHECK(r.realized > 0.0);
  CHECK(r.realized <= r.bound);
  CHECK(r.bound == doctest::Approx(2.0 * 10.0 * (std::log(2.0) + 1.0)));
  // Closed form: sum_t 1 / (1 + exp(eta (t - 1))).
  double expected = 0;
  for (int t = 0; t < 100; ++t) expected += 1.0 / (1.0 + std::exp(0.05 * t));
  CHECK(r.realized == doctest::Approx(expected));
  CHECK_FALSE(exp_weights_regret_harness(losses, 0.1, 1.0).eta_within_guarantee);
  CHECK_THROWS(exp_weights_regret_harness(std::vector<Vector>{{2.0, 0.0}}, 0.1, 1.0));
}
