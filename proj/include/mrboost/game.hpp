#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mrboost/core.hpp"
#include "mrboost/lp.hpp"
#include "mrboost/margin.hpp"

namespace mrb {

/// Default cap on |H| * |S_aug| for payoff construction.
inline constexpr std::size_t kDefaultPayoffCap = 50'000'000;

/// entries[h][e] = m(h(x + delta), y, y') for every augmented entry e.
class PayoffMatrix {
 public:
  PayoffMatrix(std::size_t num_hypotheses, std::size_t num_entries,
               std::vector<std::int8_t> entries);

  std::size_t num_hypotheses() const { return rows_; }
  std::size_t num_entries() const { return cols_; }
  int at(std::size_t h, std::size_t e) const { return entries_[h * cols_ + e]; }
  std::span<const std::int8_t> row(std::size_t h) const {
    return {entries_.data() + h * cols_, cols_};
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::int8_t> entries_;
};

PayoffMatrix build_payoff_matrix(const PredictionTable& table,
                                 const AugmentedSpace& space,
                                 std::size_t cap = kDefaultPayoffCap);
PayoffMatrix build_payoff_matrix(const FiniteHypothesisClass& hypotheses,
                                 const LabeledDataset& dataset,
                                 const PerturbationModel& perturbations,
                                 std::size_t cap = kDefaultPayoffCap);

/// Exponential-weights state of the max player.
struct GameState {
  std::size_t round = 1;  // t: P_t depends on rounds 1..t-1
  Vector cumulative_loss;  // sum_{j < t} m(h_j at e)
  std::vector<std::size_t> chosen;
  double eta = 0.0;
};

/// P_t(e) proportional to exp(eta * cumulative_loss(e)), max-subtracted.
Vector exp_weights_distribution(const GameState& state);

/// KL(p || uniform) for a distribution over p.size() points.
double kl_from_uniform(std::span<const double> p);

/// E_p[cumulative] - KL(p || P_1) / eta; P_t maximizes this over p.
double kl_regularized_objective(std::span<const double> p,
                                std::span<const double> cumulative, double eta);

/// argmin_h sum_e p(e) entries[h][e]; ties go to the lowest index.
std::size_t best_response(const PayoffMatrix& payoffs, std::span<const double> p);

/// Expected loss sum_e p(e) entries[h][e].
double expected_payoff(const PayoffMatrix& payoffs, std::size_t h,
                       std::span<const double> p);

/// Max-min value of the margin game: value = max_Q min_e -sum_h Q_h m(h, e),
/// i.e. the best achievable minimum robust margin on the grid.
struct MarginGameValue {
  double value = 0.0;
  Vector q;  // over hypotheses
  Vector p;  // over augmented entries
};

MarginGameValue matrix_game_value_lp(const PayoffMatrix& payoffs,
                                     std::size_t cap = kDefaultLpCap);

/// 3 (log M + 1) / sqrt(T).
double xi_finite(std::size_t num_entries, std::size_t rounds);

struct GameCertificate {
  /// Minimum robust margin of the uniform ensemble over h_1..h_T.
  double lower = 0.0;
  /// -(1/T) sum_t L(h_t, P_t): an upper bound on the game value.
  double upper = 0.0;
  double gap = 0.0;
  std::optional<double> lp_value;
};

struct RoundMetrics {
  std::size_t round = 0;
  double min_robust_margin = 0.0;
  double clean_accuracy = 0.0;
  double adversarial_accuracy = 0.0;
  double ne_gap = 0.0;
};

struct MrBoostOptions {
  std::optional<double> eta;  // default 1 / (2 sqrt(T))
  std::size_t lp_cap = 200'000;
  std::size_t payoff_cap = kDefaultPayoffCap;
  bool record_rounds = true;
  bool compute_lp = true;
};

struct MrBoostResult {
  EnsembleWeights q;
  std::vector<std::size_t> chosen;
  GameCertificate certificate;
  MarginReport final_report;
  std::vector<RoundMetrics> rounds;
  Vector p_average;  // (1/T) sum_t P_t
  double eta = 0.0;
};

/// Exponential weights over S_aug against best response over H for T rounds.
MrBoostResult mrboost_run(const PredictionTable& table, const LabeledDataset& dataset,
                          const PerturbationModel& perturbations, std::size_t rounds,
                          const MrBoostOptions& options = {});
MrBoostResult mrboost_run(const FiniteHypothesisClass& hypotheses,
                          const LabeledDataset& dataset,
                          const PerturbationModel& perturbations, std::size_t rounds,
                          const MrBoostOptions& options = {});

struct RegretReport {
  double realized = 0.0;  // sum_t <P_t, f_t> - min_z sum_t f_t(z)
  double bound = 0.0;     // 2 B sqrt(T) (|log |Z|| + 1)
  bool eta_within_guarantee = true;  // eta <= 1 / (2 B sqrt(T))
  std::size_t rounds = 0;
};

/// Losses chosen by an adaptive adversary from the learner's current P_t.
using LossOracle = std::function<Vector(std::size_t round, std::span<const double> p)>;

/// EXP with P_t(z) proportional to exp(-eta sum_{i<t} f_i(z)), expectations
/// in closed form.
RegretReport exp_weights_regret_harness(const std::vector<Vector>& losses, double eta,
                                        double bound_b);
RegretReport exp_weights_regret_harness(const LossOracle& oracle, std::size_t actions,
                                        std::size_t rounds, double eta, double bound_b);

}  // namespace mrb
