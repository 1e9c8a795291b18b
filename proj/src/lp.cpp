#include "mrboost/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mrb {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kReducedCostEps = 1e-11;
constexpr double kRatioTieEps = 1e-11;
constexpr double kCertifyTol = 1e-9;

/// max 1^T v  s.t.  A v <= 1, v >= 0, with A > 0 elementwise. Returns the
/// primal v and the dual u (min 1^T u s.t. A^T u >= 1).
struct PackingResult {
  Vector primal;
  Vector dual;
  std::size_t pivots = 0;
};

/// Inverse of the m x m matrix with columns cols (structural j < n, slack
/// n + i), by Gauss-Jordan elimination with partial pivoting.
std::vector<double> basis_inverse(const std::vector<Vector>& a, std::size_t n,
                                  const std::vector<std::size_t>& cols) {
  const std::size_t m = a.size();
  std::vector<double> work(m * 2 * m, 0.0);
  auto w = [&](std::size_t r, std::size_t c) -> double& { return work[r * 2 * m + c]; };
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t r = 0; r < m; ++r) {
      w(r, k) = cols[k] < n ? a[r][cols[k]] : (cols[k] - n == r ? 1.0 : 0.0);
    }
    w(k, m + k) = 1.0;
  }
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < m; ++r) {
      if (std::abs(w(r, c)) > std::abs(w(pivot, c))) pivot = r;
    }
    if (std::abs(w(pivot, c)) < 1e-14) throw std::runtime_error("simplex: singular basis");
    if (pivot != c) {
      for (std::size_t k = 0; k < 2 * m; ++k) std::swap(w(pivot, k), w(c, k));
    }
    const double d = w(c, c);
    for (std::size_t k = 0; k < 2 * m; ++k) w(c, k) /= d;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == c || w(r, c) == 0.0) continue;
      const double f = w(r, c);
      for (std::size_t k = 0; k < 2 * m; ++k) w(r, k) -= f * w(c, k);
    }
  }
  std::vector<double> inv(m * m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) inv[r * m + c] = w(r, m + c);
  }
  return inv;
}

PackingResult solve_packing(const std::vector<Vector>& a) {
  const std::size_t m = a.size();
  const std::size_t n = a.front().size();
  const std::size_t width = n + m + 1;  // structural, slack, rhs
  std::vector<double> tab((m + 1) * width, 0.0);
  auto at = [&](std::size_t r, std::size_t c) -> double& { return tab[r * width + c]; };
  std::vector<std::size_t> basis(m);
  std::iota(basis.begin(), basis.end(), n);

  // Rebuilds the tableau B^-1 [A I 1] and the reduced costs from the
  // original data, discarding the rounding error of earlier pivots.
  auto refresh = [&] {
    const std::vector<double> inv = basis_inverse(a, n, basis);
    std::fill(tab.begin(), tab.end(), 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      const double* row = inv.data() + r * m;
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += row[k] * a[k][j];
        at(r, j) = s;
      }
      double rhs = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        at(r, n + k) = row[k];
        rhs += row[k];
      }
      // Clear round-off infeasibility so the ratio test stays sound.
      at(r, width - 1) = std::max(0.0, rhs);
    }
    // Objective: minimize -1^T v; y = c_B B^-1 and d_j = c_j - y a_j.
    Vector y(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      if (basis[r] >= n) continue;
      for (std::size_t k = 0; k < m; ++k) y[k] -= inv[r * m + k];
    }
    for (std::size_t j = 0; j < n; ++j) {
      double s = -1.0;
      for (std::size_t k = 0; k < m; ++k) s -= y[k] * a[k][j];
      at(m, j) = s;
    }
    for (std::size_t k = 0; k < m; ++k) at(m, n + k) = -y[k];
    for (std::size_t r = 0; r < m; ++r) {
      if (basis[r] < width - 1) at(m, basis[r]) = 0.0;
    }
  };

  refresh();
  std::size_t pivots = 0;
  std::size_t since_refresh = 0;
  const std::size_t refresh_every = std::max<std::size_t>(50, m);
  const std::size_t max_pivots = 50 * (n + m) + 1000;
  while (true) {
    // Bland: lowest-index improving column.
    std::size_t enter = width;
    for (std::size_t j = 0; j + 1 < width; ++j) {
      if (at(m, j) < -kReducedCostEps) {
        enter = j;
        break;
      }
    }
    if (enter == width) {
      if (since_refresh == 0) break;
      refresh();
      since_refresh = 0;
      continue;
    }

    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double coef = at(i, enter);
      if (coef <= kPivotEps) continue;
      const double ratio = at(i, width - 1) / coef;
      const double tie = kRatioTieEps * (1.0 + std::abs(ratio));
      if (ratio < best_ratio - tie ||
          (ratio <= best_ratio + tie && leave < m && basis[i] < basis[leave])) {
        best_ratio = std::min(best_ratio, ratio);
        leave = i;
      }
    }
    // A > 0 keeps the packing LP bounded.
    if (leave == m) throw std::runtime_error("simplex: unbounded packing LP");

    const double pivot = at(leave, enter);
    for (std::size_t c = 0; c < width; ++c) at(leave, c) /= pivot;
    for (std::size_t r = 0; r <= m; ++r) {
      if (r == leave) continue;
      const double factor = at(r, enter);
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c < width; ++c) at(r, c) -= factor * at(leave, c);
    }
    basis[leave] = enter;
    if (++pivots > max_pivots) throw std::runtime_error("simplex: pivot limit reached");
    if (++since_refresh >= refresh_every) {
      refresh();
      since_refresh = 0;
    }
  }

  PackingResult result;
  result.primal.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) result.primal[basis[i]] = std::max(0.0, at(i, width - 1));
  }
  result.dual.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) result.dual[i] = std::max(0.0, at(m, n + i));
  result.pivots = pivots;
  return result;
}

Vector normalized(Vector v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (!(total > 0.0)) throw std::runtime_error("simplex: degenerate strategy");
  for (double& x : v) x /= total;
  return v;
}

}  // namespace

GameSolution solve_zero_sum(const std::vector<Vector>& payoff, std::size_t cap) {
  if (payoff.empty() || payoff.front().empty()) {
    throw std::invalid_argument("game LP: empty payoff matrix");
  }
  const std::size_t rows = payoff.size();
  const std::size_t cols = payoff.front().size();
  if (rows * cols > cap) {
    throw std::length_error("game LP: rows * cols = " + std::to_string(rows * cols) +
                            " exceeds lp cap " + std::to_string(cap));
  }
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& row : payoff) {
    if (row.size() != cols) throw std::invalid_argument("game LP: ragged payoff matrix");
    for (double v : row) {
      if (!std::isfinite(v)) throw std::invalid_argument("game LP: non-finite payoff");
      lo = std::min(lo, v);
    }
  }
  const double shift = 1.0 - lo;
  std::vector<Vector> shifted(payoff);
  for (auto& row : shifted) {
    for (double& v : row) v += shift;
  }

  const PackingResult packing = solve_packing(shifted);
  GameSolution solution;
  solution.col_strategy = normalized(packing.primal);
  solution.row_strategy = normalized(packing.dual);
  solution.pivots = packing.pivots;

  const double primal_total =
      std::accumulate(packing.primal.begin(), packing.primal.end(), 0.0);
  solution.value = 1.0 / primal_total - shift;

  solution.row_guarantee = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += solution.row_strategy[i] * payoff[i][j];
    solution.row_guarantee = std::min(solution.row_guarantee, s);
  }
  solution.col_guarantee = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += payoff[i][j] * solution.col_strategy[j];
    solution.col_guarantee = std::max(solution.col_guarantee, s);
  }
  if (solution.col_guarantee - solution.row_guarantee > kCertifyTol ||
      solution.value < solution.row_guarantee - kCertifyTol ||
      solution.value > solution.col_guarantee + kCertifyTol) {
    throw std::runtime_error("game LP: strategies fail to certify the value");
  }
  return solution;
}

}  // namespace mrb
