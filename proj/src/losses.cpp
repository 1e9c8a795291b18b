#include "mrboost/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mrb {

namespace {

void check_label(std::span<const double> g, int y) {
  if (g.size() < 2) throw std::invalid_argument("loss: need at least two logits");
  if (y < 0 || static_cast<std::size_t>(y) >= g.size()) {
    throw std::invalid_argument("loss: label out of range");
  }
}

Vector negated(std::span<const double> g) {
  Vector out(g.begin(), g.end());
  for (double& v : out) v = -v;
  return out;
}

}  // namespace

LossKind parse_loss_kind(std::string_view name) {
  if (name == "ce") return LossKind::ce;
  if (name == "mce") return LossKind::mce;
  if (name == "mce_a") return LossKind::mce_a;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::ce: return "ce";
    case LossKind::mce: return "mce";
    case LossKind::mce_a: return "mce_a";
  }
  return "?";
}

double log_sum_exp(std::span<const double> g) {
  const double top = *std::max_element(g.begin(), g.end());
  double s = 0.0;
  for (double v : g) s += std::exp(v - top);
  return top + std::log(s);
}

Vector softmax(std::span<const double> g) {
  const double top = *std::max_element(g.begin(), g.end());
  Vector p(g.size());
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    p[j] = std::exp(g[j] - top);
    s += p[j];
  }
  for (double& v : p) v /= s;
  return p;
}

double ce_loss(std::span<const double> g, int y) {
  check_label(g, y);
  // Summing the shifted terms keeps precision when g_y dominates.
  const double top = *std::max_element(g.begin(), g.end());
  double s = 0.0;
  for (double v : g) s += std::exp(v - top);
  return (top - g[y]) + std::log(s);
}

Vector ce_grad(std::span<const double> g, int y) {
  check_label(g, y);
  Vector grad = softmax(g);
  grad[y] -= 1.0;
  return grad;
}

double mce_loss(std::span<const double> g, int y, int y_prime) {
  check_label(g, y);
  check_label(g, y_prime);
  if (y == y_prime) throw std::invalid_argument("mce: y == y'");
  return ce_loss(g, y) + ce_loss(negated(g), y_prime);
}

Vector mce_grad(std::span<const double> g, int y, int y_prime) {
  check_label(g, y);
  check_label(g, y_prime);
  if (y == y_prime) throw std::invalid_argument("mce: y == y'");
  Vector grad = ce_grad(g, y);
  const Vector reflected = ce_grad(negated(g), y_prime);
  for (std::size_t j = 0; j < grad.size(); ++j) grad[j] -= reflected[j];
  return grad;
}

double mce_a_loss(std::span<const double> g, int y) {
  check_label(g, y);
  const int k = static_cast<int>(g.size());
  const Vector neg = negated(g);
  double rivals = 0.0;
  for (int yp = 0; yp < k; ++yp) {
    if (yp != y) rivals += ce_loss(neg, yp);
  }
  return ce_loss(g, y) + rivals / (k - 1);
}

Vector mce_a_grad(std::span<const double> g, int y) {
  check_label(g, y);
  const int k = static_cast<int>(g.size());
  Vector grad = ce_grad(g, y);
  // Sum over y' != y of d ce(-g, y') / dg = -(softmax(-g) * (K - 1) - (1 - onehot(y))).
  const Vector q = softmax(negated(g));
  for (int j = 0; j < k; ++j) {
    const double rivals = q[j] * (k - 1) - (j == y ? 0.0 : 1.0);
    grad[j] -= rivals / (k - 1);
  }
  return grad;
}

LossValue evaluate_loss(LossKind kind, std::span<const double> g, int y, int y_prime) {
  switch (kind) {
    case LossKind::ce: return {ce_loss(g, y), ce_grad(g, y)};
    case LossKind::mce: return {mce_loss(g, y, y_prime), mce_grad(g, y, y_prime)};
    case LossKind::mce_a: return {mce_a_loss(g, y), mce_a_grad(g, y)};
  }
  throw std::invalid_argument("loss: invalid selector");
}

}  // namespace mrb
