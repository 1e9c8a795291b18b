#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mrboost/data.hpp"
#include "mrboost/robust.hpp"

using namespace mrb;

namespace {

MlpParams random_mlp(std::vector<std::size_t> sizes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return xavier_mlp(sizes, rng);
}

bool inside_box(const Vector& adv, const Vector& x, double eps) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(adv[i] - x[i]) > eps) return false;
  }
  return true;
}

SgdConfig small_sgd(std::uint64_t seed, std::size_t iterations = 40) {
  SgdConfig s;
  s.step_size = 0.1;
  s.iterations = iterations;
  s.batch_size = 8;
  s.momentum = 0.5;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("projection lands exactly inside the box") {
  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  AttackConfig cfg;
  for (double eps : {0.1, 0.3, 1e-3, 0.7}) {
    cfg.epsilon = eps;
    for (int k = 0; k < 2000; ++k) {
      const Vector x{u(rng), u(rng) * 1e-3, u(rng) * 1e3};
      const Vector c{x[0] + u(rng), x[1] + u(rng), x[2] + u(rng)};
      CHECK(inside_box(project_to_ball(x, c, cfg), x, eps));
    }
  }
  cfg.epsilon = 1.0;
  cfg.input_box = std::pair{0.0, 1.0};
  const Vector p = project_to_ball(Vector{0.5}, Vector{3.0}, cfg);
  CHECK(p[0] == 1.0);
}

TEST_CASE("sign of zero is zero") {
  CHECK(sign_of(0.0) == 0.0);
  CHECK(sign_of(-0.0) == 0.0);
  CHECK(sign_of(-2.0) == -1.0);
}

TEST_CASE("attack config validation") {
  AttackConfig c;
  c.steps = 0;
  CHECK_THROWS(c.validate());
  c = AttackConfig{};
  c.epsilon = -1.0;
  CHECK_THROWS(c.validate());
  const AttackConfig t = AttackConfig::pgd_train(0.2), e = AttackConfig::pgd_eval(0.2);
  CHECK(t.steps == 10);
  CHECK(e.steps == 20);
  CHECK(t.step_size == doctest::Approx(0.05));
  CHECK(t.random_start);
}

TEST_CASE("PGD without random start equals FGSM on a linear model") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const MlpParams p = random_mlp({3, 3}, s);
    const Vector x{n(rng), n(rng), n(rng)};
    const int y = static_cast<int>(s % 3);
    AttackConfig cfg;
    cfg.epsilon = 0.2;
    cfg.random_start = false;
    cfg.steps = 1;
    cfg.step_size = 0.2;
    const Vector f = fgsm(p, x, y, cfg);
    const AttackResult r = pgd(loss_objective({&p}, LossKind::ce, y), x, cfg, rng);
    CHECK(r.x == f);
  }
}

TEST_CASE("best-so-far objective never decreases and more steps never hurt") {
  const MlpParams p = random_mlp({2, 8, 3}, 4);
  const Vector x{0.3, -0.2};
  AttackConfig cfg = AttackConfig::pgd_eval(0.3, 5);
  double previous = -1e300;
  for (std::size_t k : {1, 2, 5, 10, 20}) {
    cfg.steps = k;
    auto rng = derived_rng(5, 0, 0);
    const AttackResult r = pgd(loss_objective({&p}, LossKind::ce, 1), x, cfg, rng);
    REQUIRE(r.best_trace.size() == k + 1);
    for (std::size_t i = 1; i < r.best_trace.size(); ++i) {
      CHECK(r.best_trace[i] >= r.best_trace[i - 1]);
    }
    CHECK(r.objective >= previous);
    previous = r.objective;
    CHECK(inside_box(r.x, x, 0.3));
  }
}

TEST_CASE("the three deterministic samplers coincide for two classes") {
  const LabeledDataset data = two_moons(20, 0.1, 1);
  const MlpParams p = random_mlp({2, 6, 2}, 9);
  const AttackConfig cfg = AttackConfig::pgd_train(0.2, 3);
  const std::vector<std::size_t> batch{0, 5, 11, 19};
  const auto all = sampler_all(data, {&p}, batch, cfg, 7);
  const auto rnd = sampler_rnd(data, {&p}, batch, cfg, 7);
  const auto max = sampler_max(data, {&p}, batch, cfg, 7);
  REQUIRE(all.size() == 4);
  for (std::size_t b = 0; b < 4; ++b) {
    CHECK(all[b].y_false == rnd[b].y_false);
    CHECK(all[b].y_false == max[b].y_false);
    CHECK(all[b].delta == rnd[b].delta);
    CHECK(all[b].delta == max[b].delta);
    CHECK(inside_box(all[b].delta, Vector(2, 0.0), 0.2));
  }
}

TEST_CASE("sampler_all emits every false label for several classes") {
  const LabeledDataset data = blobs(12, 4, 0.5, 2);
  const MlpParams p = random_mlp({2, 6, 4}, 1);
  const std::vector<std::size_t> batch{1, 2};
  const auto t = sampler_all(data, {&p}, batch, AttackConfig::pgd_train(0.1), 0);
  CHECK(t.size() == 6);
  CHECK(t[0].delta == t[2].delta);
}

TEST_CASE("exponential sampler probabilities") {
  const Vector p = exp_sampler_probabilities(Vector{1.0, -1.0}, 0.5);
  CHECK(p[0] == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(p[1] == doctest::Approx(0.2689).epsilon(1e-4));
  const Vector u = exp_sampler_probabilities(Vector{3.0, -7.0, 1.0}, 0.0);
  for (double v : u) CHECK(v == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS(exp_sampler_probabilities(Vector{}, 1.0));
}

TEST_CASE("exponential sampler draw frequencies stay within 3 sigma") {
  const LabeledDataset data = two_moons(3, 0.1, 4);
  const ExpSamplerPool pool(data, 0.2, 1, 0);
  REQUIRE(pool.size() == 6);
  const MlpParams m = random_mlp({2, 5, 2}, 3);
  const ModelRefs models{&m};
  const Vector probs = exp_sampler_probabilities(pool_scores(pool, data, models), 2.0);
  std::mt19937_64 rng(1);
  const std::size_t draws = 100000;
  const auto batch = sampler_exp(pool, data, models, 2.0, draws, rng);
  std::vector<double> counts(pool.size(), 0.0);
  for (const AdvTuple& t : batch) {
    for (std::size_t c = 0; c < pool.size(); ++c) {
      const AdvTuple& cand = pool.candidates()[c];
      if (cand.sample == t.sample && cand.y_false == t.y_false && cand.delta == t.delta) {
        counts[c] += 1.0;
        break;
      }
    }
  }
  for (std::size_t c = 0; c < pool.size(); ++c) {
    const double mean = draws * probs[c];
    const double sd = std::sqrt(draws * probs[c] * (1 - probs[c]));
    CHECK(std::abs(counts[c] - mean) <= 3 * sd + 1e-9);
  }
  ExpSamplerPool empty_pool(data, 0.2, 0, 0);
  CHECK(empty_pool.size() == 3);
}

TEST_CASE("exp pool holds zero, random and attack perturbations") {
  const LabeledDataset data = two_moons(4, 0.1, 2);
  ExpSamplerPool pool(data, 0.3, 2, 1);
  CHECK(pool.size() == 4 * 3);
  CHECK(pool.candidates()[0].delta == Vector{0.0, 0.0});
  for (const auto& c : pool.candidates()) CHECK(inside_box(c.delta, Vector(2, 0.0), 0.3));
  const MlpParams m = random_mlp({2, 5, 2}, 3);
  pool.add_attacks(data, {&m}, AttackConfig::pgd_train(0.3), 1);
  CHECK(pool.size() == 4 * 4);
}

TEST_CASE("zero radius and zero steps both give clean training") {
  const LabeledDataset data = two_moons(30, 0.1, 3);
  const std::vector<std::size_t> sizes{2, 8, 2};
  AttackConfig no_radius = AttackConfig::pgd_train(0.0, 1);
  AttackConfig no_steps = AttackConfig::pgd_train(0.3, 1);
  no_steps.steps = 0;
  const MlpParams a = adversarial_training(data, sizes, small_sgd(2), no_radius, LossKind::ce);
  const MlpParams b = adversarial_training(data, sizes, small_sgd(2), no_steps, LossKind::ce);
  CHECK(a == b);
  CHECK_THROWS(adversarial_training(data, sizes, small_sgd(2), no_steps, LossKind::mce));
}

TEST_CASE("a one-stage greedy ensemble is exactly adversarial training") {
  const LabeledDataset data = two_moons(30, 0.1, 5);
  const std::vector<std::size_t> sizes{2, 8, 2};
  const AttackConfig attack = AttackConfig::pgd_train(0.2, 4);
  const MlpParams at = adversarial_training(data, sizes, small_sgd(6), attack, LossKind::ce);
  const ScoreEnsemble rb = robboost_greedy(data, sizes, 1, small_sgd(6), attack);
  REQUIRE(rb.size() == 1);
  CHECK(rb.member(0) == at);
}

TEST_CASE("greedy stages and the individual variant") {
  const LabeledDataset data = two_moons(30, 0.1, 5);
  const std::vector<std::size_t> sizes{2, 6, 2};
  const AttackConfig attack = AttackConfig::pgd_train(0.2, 4);
  const ScoreEnsemble joint = robboost_greedy(data, sizes, 2, small_sgd(1, 20), attack);
  const ScoreEnsemble ind =
      robboost_greedy(data, sizes, 2, small_sgd(1, 20), attack, {InitKind::rnd, true});
  CHECK(joint.size() == 2);
  CHECK(joint.member(0) == ind.member(0));
  CHECK_FALSE(joint.member(1) == ind.member(1));
  SgdConfig frozen = small_sgd(1, 0);
  const ScoreEnsemble per =
      robboost_greedy(data, sizes, 3, frozen, attack, {InitKind::per, false});
  CHECK(per.member(2) == per.member(0));
}

TEST_CASE("randomized objectives on degenerate ensembles") {
  const MlpParams g1 = random_mlp({2, 6, 3}, 1), g2 = random_mlp({2, 6, 3}, 2);
  const Vector x{0.1, 0.4};
  Vector grad_a, grad_b, grad_c;
  const RandomizedEnsemble same{g1, g1, 0.3};
  const double ce = loss_objective({&g1}, LossKind::ce, 2)(x, grad_a);
  CHECK(randomized_objective(same, 2, AggregationLevel::logit)(x, grad_b) == doctest::Approx(ce));
  CHECK(randomized_objective(same, 2, AggregationLevel::probability)(x, grad_c) ==
        doctest::Approx(ce));
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(grad_b[i] == doctest::Approx(grad_a[i]));
    CHECK(grad_c[i] == doctest::Approx(grad_a[i]));
  }
  const RandomizedEnsemble first_only{g1, g2, 1.0};
  CHECK(randomized_objective(first_only, 0, AggregationLevel::probability)(x, grad_b) ==
        doctest::Approx(loss_objective({&g1}, LossKind::ce, 0)(x, grad_a)));
  CHECK_THROWS(randomized_objective({g1, g2, 1.5}, 0, AggregationLevel::logit));
}

TEST_CASE("randomized objective gradients match central differences") {
  const MlpParams g1 = random_mlp({2, 6, 3}, 3), g2 = random_mlp({2, 6, 3}, 4);
  const RandomizedEnsemble ens{g1, g2, 0.35};
  const Vector x{0.2, -0.7};
  for (auto level : {AggregationLevel::logit, AggregationLevel::probability}) {
    const Objective f = randomized_objective(ens, 1, level);
    Vector grad, unused;
    f(x, grad);
    for (std::size_t i = 0; i < 2; ++i) {
      Vector up(x), down(x);
      up[i] += 1e-6;
      down[i] -= 1e-6;
      const double fd = (f(up, unused) - f(down, unused)) / 2e-6;
      CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("robust evaluation") {
  const LabeledDataset data = two_moons(60, 0.1, 8);
  const std::vector<std::size_t> sizes{2, 8, 2};
  const MlpParams m =
      adversarial_training(data, sizes, small_sgd(3, 100), AttackConfig::pgd_train(0.1, 1),
                           LossKind::ce);
  const RobustEvaluation clean = evaluate_robust_accuracy({&m}, data, AttackConfig::pgd_eval(0.0));
  CHECK(clean.robust_accuracy == clean.clean_accuracy);
  const RobustEvaluation adv = evaluate_robust_accuracy({&m}, data, AttackConfig::pgd_eval(0.3));
  CHECK(adv.robust_accuracy <= adv.clean_accuracy);
  CHECK(adv.adversarial_risk == doctest::Approx(1.0 - adv.robust_accuracy));
  for (std::size_t i = 0; i < data.size(); ++i) CHECK(inside_box(adv.attacked[i], data.x(i), 0.3));

  const MlpParams other = random_mlp({2, 8, 2}, 44);
  const RandomizedEnsemble ens{m, other, 0.7};
  const AttackConfig attack = AttackConfig::pgd_eval(0.2, 2);
  const RobustEvaluation r = evaluate_robust_accuracy(ens, data, attack, AggregationLevel::logit);
  double expected_err = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vector& a = r.attacked[i];
    const double e1 = argmax_classify(mlp_forward(m, a)) == data.y(i) ? 0.0 : 1.0;
    const double e2 = argmax_classify(mlp_forward(other, a)) == data.y(i) ? 0.0 : 1.0;
    CHECK(r.per_sample_error[i] == doctest::Approx(0.7 * e1 + 0.3 * e2));
    expected_err += 0.7 * e1 + 0.3 * e2;
  }
  CHECK(r.robust_accuracy == doctest::Approx(1.0 - expected_err / data.size()));
  CHECK(r.robust_accuracy <= r.clean_accuracy + 1e-12);
}

TEST_CASE("sampler and init names") {
  for (auto k : {SamplerKind::exp, SamplerKind::all, SamplerKind::rnd, SamplerKind::max}) {
    CHECK(parse_sampler_kind(to_string(k)) == k);
  }
  CHECK(parse_init_kind("PerInit") == InitKind::per);
  CHECK_THROWS(parse_sampler_kind("greedy"));
}

TEST_CASE("mini-batches") {
  std::mt19937_64 rng(0);
  auto b = sample_batch(10, 10, rng);
  std::sort(b.begin(), b.end());
  for (std::size_t i = 0; i < 10; ++i) CHECK(b[i] == i);
  CHECK(sample_batch(3, 8, rng).size() == 8);
}
