#include "mrboost/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mrb {

PayoffMatrix::PayoffMatrix(std::size_t num_hypotheses, std::size_t num_entries,
                           std::vector<std::int8_t> entries)
    : rows_(num_hypotheses), cols_(num_entries), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw std::invalid_argument("payoff matrix: size mismatch");
  }
  for (auto v : entries_) {
    if (v < -1 || v > 1) throw std::invalid_argument("payoff matrix: entry outside {-1,0,1}");
  }
}

PayoffMatrix build_payoff_matrix(const PredictionTable& table,
                                 const AugmentedSpace& space, std::size_t cap) {
  if (table.num_samples() != space.num_samples ||
      table.num_perturbations() != space.num_perturbations) {
    throw std::invalid_argument("payoff matrix: table and augmented space disagree");
  }
  const std::size_t rows = table.num_hypotheses();
  const std::size_t cols = space.size();
  if (cols != 0 && rows > cap / cols) {
    throw std::length_error("payoff matrix: |H| * |S_aug| = " +
                            std::to_string(rows * cols) + " exceeds payoff cap " +
                            std::to_string(cap));
  }
  std::vector<std::int8_t> entries(rows * cols);
  for (std::size_t h = 0; h < rows; ++h) {
    for (std::size_t e = 0; e < cols; ++e) {
      const AugmentedEntry& a = space.entries[e];
      entries[h * cols + e] = static_cast<std::int8_t>(pairwise_margin_loss(
          table.at(h, a.sample, a.perturbation), a.true_label, a.false_label));
    }
  }
  return PayoffMatrix(rows, cols, std::move(entries));
}

PayoffMatrix build_payoff_matrix(const FiniteHypothesisClass& hypotheses,
                                 const LabeledDataset& dataset,
                                 const PerturbationModel& perturbations,
                                 std::size_t cap) {
  return build_payoff_matrix(tabulate(hypotheses, dataset, perturbations),
                             build_augmented_space(dataset, perturbations), cap);
}

Vector exp_weights_distribution(const GameState& state) {
  if (state.round < 1) throw std::invalid_argument("exp weights: round must be >= 1");
  const Vector& cum = state.cumulative_loss;
  if (cum.empty()) throw std::invalid_argument("exp weights: empty support");
  const double top = *std::max_element(cum.begin(), cum.end());
  Vector p(cum.size());
  double total = 0.0;
  for (std::size_t e = 0; e < cum.size(); ++e) {
    p[e] = std::exp(state.eta * (cum[e] - top));
    total += p[e];
  }
  for (double& v : p) v /= total;
  return p;
}

double kl_from_uniform(std::span<const double> p) {
  const double log_m = std::log(static_cast<double>(p.size()));
  double kl = 0.0;
  for (double v : p) {
    if (v > 0.0) kl += v * (std::log(v) + log_m);
  }
  return kl;
}

double kl_regularized_objective(std::span<const double> p,
                                std::span<const double> cumulative, double eta) {
  if (p.size() != cumulative.size()) {
    throw std::invalid_argument("kl objective: length mismatch");
  }
  if (!(eta > 0.0)) throw std::invalid_argument("kl objective: eta must be > 0");
  double expectation = 0.0;
  for (std::size_t e = 0; e < p.size(); ++e) expectation += p[e] * cumulative[e];
  return expectation - kl_from_uniform(p) / eta;
}

double expected_payoff(const PayoffMatrix& payoffs, std::size_t h,
                       std::span<const double> p) {
  const auto row = payoffs.row(h);
  double s = 0.0;
  for (std::size_t e = 0; e < row.size(); ++e) s += p[e] * row[e];
  return s;
}

std::size_t best_response(const PayoffMatrix& payoffs, std::span<const double> p) {
  if (p.size() != payoffs.num_entries()) {
    throw std::invalid_argument("best response: distribution length mismatch");
  }
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t h = 0; h < payoffs.num_hypotheses(); ++h) {
    const double v = expected_payoff(payoffs, h, p);
    if (v < best_value) {
      best_value = v;
      best = h;
    }
  }
  return best;
}

MarginGameValue matrix_game_value_lp(const PayoffMatrix& payoffs, std::size_t cap) {
  std::vector<Vector> margin(payoffs.num_hypotheses(), Vector(payoffs.num_entries()));
  for (std::size_t h = 0; h < payoffs.num_hypotheses(); ++h) {
    for (std::size_t e = 0; e < payoffs.num_entries(); ++e) {
      margin[h][e] = -payoffs.at(h, e);
    }
  }
  GameSolution s = solve_zero_sum(margin, cap);
  return {s.value, std::move(s.row_strategy), std::move(s.col_strategy)};
}

double xi_finite(std::size_t num_entries, std::size_t rounds) {
  if (num_entries == 0 || rounds == 0) throw std::invalid_argument("xi: empty input");
  return 3.0 * (std::log(static_cast<double>(num_entries)) + 1.0) /
         std::sqrt(static_cast<double>(rounds));
}

namespace {

/// Exact vote counts of the running uniform ensemble at every perturbed point.
class VoteTally {
 public:
  VoteTally(const PredictionTable& table, const LabeledDataset& dataset)
      : table_(table), dataset_(dataset),
        votes_(table.num_samples() * table.num_perturbations() * table.num_classes(), 0) {}

  void add(std::size_t h) {
    ++members_;
    const std::size_t grid = table_.num_perturbations();
    const std::size_t k = table_.num_classes();
    for (std::size_t i = 0; i < table_.num_samples(); ++i) {
      for (std::size_t g = 0; g < grid; ++g) {
        ++votes_[(i * grid + g) * k + table_.at(h, i, g)];
      }
    }
  }

  MarginReport report(std::size_t zero_perturbation) const {
    const std::size_t grid = table_.num_perturbations();
    const std::size_t k = table_.num_classes();
    const double t = static_cast<double>(members_);
    MarginReport r;
    r.per_sample_min_margin.resize(table_.num_samples());
    std::size_t robust = 0, clean = 0;
    for (std::size_t i = 0; i < table_.num_samples(); ++i) {
      const int y = dataset_.y(i);
      long worst = std::numeric_limits<long>::max();
      for (std::size_t g = 0; g < grid; ++g) {
        const long* v = votes_.data() + (i * grid + g) * k;
        long rival = std::numeric_limits<long>::min();
        for (std::size_t j = 0; j < k; ++j) {
          if (static_cast<int>(j) != y) rival = std::max(rival, v[j]);
        }
        const long m = v[y] - rival;
        worst = std::min(worst, m);
        if (g == zero_perturbation && m > 0) ++clean;
      }
      if (worst > 0) ++robust;
      r.per_sample_min_margin[i] = static_cast<double>(worst) / t;
    }
    const double n = static_cast<double>(table_.num_samples());
    r.min_robust_margin = *std::min_element(r.per_sample_min_margin.begin(),
                                            r.per_sample_min_margin.end());
    r.adversarial_accuracy = robust / n;
    r.clean_accuracy = zero_perturbation < grid
                           ? clean / n
                           : std::numeric_limits<double>::quiet_NaN();
    return r;
  }

 private:
  const PredictionTable& table_;
  const LabeledDataset& dataset_;
  std::vector<long> votes_;
  std::size_t members_ = 0;
};

}  // namespace

MrBoostResult mrboost_run(const PredictionTable& table, const LabeledDataset& dataset,
                          const PerturbationModel& perturbations, std::size_t rounds,
                          const MrBoostOptions& options) {
  if (rounds < 1) throw std::invalid_argument("mrboost: T must be >= 1");
  const AugmentedSpace space = build_augmented_space(dataset, perturbations);
  const PayoffMatrix payoffs = build_payoff_matrix(table, space, options.payoff_cap);
  const double eta = options.eta.value_or(1.0 / (2.0 * std::sqrt(static_cast<double>(rounds))));
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("mrboost: eta must be finite and >= 0");
  }

  GameState state;
  state.eta = eta;
  state.cumulative_loss.assign(space.size(), 0.0);
  Vector p_sum(space.size(), 0.0);
  double achieved = 0.0;
  VoteTally tally(table, dataset);
  const std::size_t zero = perturbations.zero_index();

  MrBoostResult result{EnsembleWeights::uniform(1), {}, {}, {}, {}, {}, eta};
  for (std::size_t t = 1; t <= rounds; ++t) {
    state.round = t;
    const Vector p = exp_weights_distribution(state);
    for (std::size_t e = 0; e < p.size(); ++e) p_sum[e] += p[e];
    const std::size_t h = best_response(payoffs, p);
    achieved += expected_payoff(payoffs, h, p);
    const auto row = payoffs.row(h);
    for (std::size_t e = 0; e < row.size(); ++e) state.cumulative_loss[e] += row[e];
    state.chosen.push_back(h);
    tally.add(h);

    if (options.record_rounds || t == rounds) {
      const MarginReport report = tally.report(zero);
      const double upper = -achieved / static_cast<double>(t);
      if (options.record_rounds) {
        result.rounds.push_back({t, report.min_robust_margin, report.clean_accuracy,
                                 report.adversarial_accuracy,
                                 upper - report.min_robust_margin});
      }
      if (t == rounds) {
        result.final_report = report;
        result.certificate.lower = report.min_robust_margin;
        result.certificate.upper = upper;
        result.certificate.gap = upper - report.min_robust_margin;
      }
    }
  }

  result.chosen = state.chosen;
  result.q = EnsembleWeights::from_choices(table.num_hypotheses(), result.chosen);
  for (double& v : p_sum) v /= static_cast<double>(rounds);
  result.p_average = std::move(p_sum);
  if (options.compute_lp && payoffs.num_hypotheses() * payoffs.num_entries() <= options.lp_cap) {
    result.certificate.lp_value = matrix_game_value_lp(payoffs, options.lp_cap).value;
  }
  return result;
}

MrBoostResult mrboost_run(const FiniteHypothesisClass& hypotheses,
                          const LabeledDataset& dataset,
                          const PerturbationModel& perturbations, std::size_t rounds,
                          const MrBoostOptions& options) {
  return mrboost_run(tabulate(hypotheses, dataset, perturbations), dataset,
                     perturbations, rounds, options);
}

namespace {

RegretReport run_exp(const LossOracle& oracle, std::size_t actions, std::size_t rounds,
                     double eta, double bound_b) {
  if (actions == 0 || rounds == 0) throw std::invalid_argument("regret: empty problem");
  if (!(bound_b > 0.0)) throw std::invalid_argument("regret: B must be > 0");
  if (!(eta >= 0.0)) throw std::invalid_argument("regret: eta must be >= 0");
  Vector cumulative(actions, 0.0);
  double learner = 0.0;
  GameState state;
  state.eta = eta;
  for (std::size_t t = 1; t <= rounds; ++t) {
    // EXP minimizes, so the weights use the negated cumulative loss.
    state.round = t;
    state.cumulative_loss.resize(actions);
    for (std::size_t z = 0; z < actions; ++z) state.cumulative_loss[z] = -cumulative[z];
    const Vector p = exp_weights_distribution(state);
    const Vector f = oracle(t, p);
    if (f.size() != actions) throw std::invalid_argument("regret: loss length mismatch");
    for (std::size_t z = 0; z < actions; ++z) {
      if (std::abs(f[z]) > bound_b) {
        throw std::invalid_argument("regret: loss exceeds the bound B");
      }
      learner += p[z] * f[z];
      cumulative[z] += f[z];
    }
  }
  RegretReport report;
  report.rounds = rounds;
  report.realized = learner - *std::min_element(cumulative.begin(), cumulative.end());
  const double sqrt_t = std::sqrt(static_cast<double>(rounds));
  report.bound =
      2.0 * bound_b * sqrt_t * (std::abs(std::log(static_cast<double>(actions))) + 1.0);
  report.eta_within_guarantee = eta <= 1.0 / (2.0 * bound_b * sqrt_t) * (1.0 + 1e-12);
  return report;
}

}  // namespace

RegretReport exp_weights_regret_harness(const std::vector<Vector>& losses, double eta,
                                        double bound_b) {
  if (losses.empty()) throw std::invalid_argument("regret: empty loss sequence");
  return run_exp([&](std::size_t t, std::span<const double>) { return losses[t - 1]; },
                 losses.front().size(), losses.size(), eta, bound_b);
}

RegretReport exp_weights_regret_harness(const LossOracle& oracle, std::size_t actions,
                                        std::size_t rounds, double eta, double bound_b) {
  return run_exp(oracle, actions, rounds, eta, bound_b);
}

}  // namespace mrb
