#pragma once

#include <span>
#include <string_view>

#include "mrboost/core.hpp"

namespace mrb {

enum class LossKind { ce, mce, mce_a };

LossKind parse_loss_kind(std::string_view name);
std::string_view to_string(LossKind kind);

/// log sum_j exp(g_j), max-subtracted.
double log_sum_exp(std::span<const double> g);
Vector softmax(std::span<const double> g);

/// -g_y + log sum_j exp(g_j).
double ce_loss(std::span<const double> g, int y);
/// softmax(g) - onehot(y).
Vector ce_grad(std::span<const double> g, int y);

/// ce(g, y) + ce(-g, y'); rejects y == y'.
double mce_loss(std::span<const double> g, int y, int y_prime);
Vector mce_grad(std::span<const double> g, int y, int y_prime);

/// Average of mce over every false label.
double mce_a_loss(std::span<const double> g, int y);
Vector mce_a_grad(std::span<const double> g, int y);

struct LossValue {
  double value = 0.0;
  Vector grad;  // d loss / d logits
};

/// y_prime is only read for LossKind::mce.
LossValue evaluate_loss(LossKind kind, std::span<const double> g, int y,
                        int y_prime = -1);

}  // namespace mrb
