#include <doctest.h>

#include <cmath>
#include <random>

#include "mrboost/losses.hpp"

using namespace mrb;

namespace {

long double ce_reference(const Vector& g, int y) {
  long double sum = 0;
  for (double v : g) sum += std::exp(static_cast<long double>(v));
  return std::log(sum) - g[y];
}

Vector negate(const Vector& g) {
  Vector out(g);
  for (double& v : out) v = -v;
  return out;
}

}  // namespace

TEST_CASE("cross entropy matches an extended-precision evaluation") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    Vector g(4);
    for (double& v : g) v = n(rng);
    const int y = k % 4;
    CHECK(ce_loss(g, y) == doctest::Approx(static_cast<double>(ce_reference(g, y))).epsilon(1e-13));
  }
  CHECK(ce_loss(Vector{0.0, 0.0}, 0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("log-sum-exp survives large logits") {
  CHECK(log_sum_exp(Vector{1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(log_sum_exp(Vector{-1000.0, -1000.0}) == doctest::Approx(-1000.0 + std::log(2.0)));
  const Vector p = softmax(Vector{800.0, 0.0});
  CHECK(p[0] == 1.0);
  CHECK(p[1] >= 0.0);
}

TEST_CASE("margin cross entropy is ce(g, y) + ce(-g, y')") {
  const Vector g{0.3, -1.2, 2.0};
  CHECK(mce_loss(g, 0, 2) == doctest::Approx(ce_loss(g, 0) + ce_loss(negate(g), 2)));
  CHECK_THROWS(mce_loss(g, 1, 1));
  CHECK(mce_a_loss(g, 1) ==
        doctest::Approx(0.5 * (mce_loss(g, 1, 0) + mce_loss(g, 1, 2))));
}

TEST_CASE("for two classes mce is twice ce and mce_a equals mce") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int k = 0; k < 1000; ++k) {
    const Vector g{n(rng), n(rng)};
    const int y = k % 2;
    CHECK(std::abs(mce_loss(g, y, 1 - y) - 2.0 * ce_loss(g, y)) <= 1e-10);
    CHECK(std::abs(mce_a_loss(g, y) - mce_loss(g, y, 1 - y)) <= 1e-12);
  }
}

TEST_CASE("loss gradients match central differences") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 2.0);
  const double h = 1e-6;
  for (int k = 0; k < 50; ++k) {
    Vector g(3);
    for (double& v : g) v = n(rng);
    const int y = k % 3, yp = (k + 1) % 3;
    for (LossKind kind : {LossKind::ce, LossKind::mce, LossKind::mce_a}) {
      const LossValue v = evaluate_loss(kind, g, y, yp);
      for (std::size_t j = 0; j < g.size(); ++j) {
        Vector up(g), down(g);
        up[j] += h;
        down[j] -= h;
        const double fd =
            (evaluate_loss(kind, up, y, yp).value - evaluate_loss(kind, down, y, yp).value) /
            (2 * h);
        CHECK(v.grad[j] == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("loss names round-trip") {
  for (LossKind kind : {LossKind::ce, LossKind::mce, LossKind::mce_a}) {
    CHECK(parse_loss_kind(to_string(kind)) == kind);
  }
  CHECK_THROWS(parse_loss_kind("hinge"));
}
