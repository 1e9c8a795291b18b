#pragma once

#include <cstddef>
#include <vector>

#include "mrboost/core.hpp"

namespace mrb {

/// Default cap on rows * columns for the LP oracle.
inline constexpr std::size_t kDefaultLpCap = 2'000'000;

/// Mixed equilibrium of a finite zero-sum game where the row player
/// maximizes x^T A y.
struct GameSolution {
  double value = 0.0;
  Vector row_strategy;
  Vector col_strategy;
  /// min_j (x^T A)_j: what the row strategy guarantees.
  double row_guarantee = 0.0;
  /// max_i (A y)_i: what the column strategy concedes.
  double col_guarantee = 0.0;
  std::size_t pivots = 0;
};

/// Solves the game with a self-contained dense simplex (Bland's rule) on the
/// shifted value-variable encoding. Throws std::length_error when
/// rows * cols exceeds cap, std::runtime_error when the returned strategies
/// do not certify the value within 1e-9.
GameSolution solve_zero_sum(const std::vector<Vector>& payoff,
                            std::size_t cap = kDefaultLpCap);

}  // namespace mrb
