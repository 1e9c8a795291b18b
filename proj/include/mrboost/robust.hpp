#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "mrboost/core.hpp"
#include "mrboost/losses.hpp"
#include "mrboost/nn.hpp"

namespace mrb {

struct AttackConfig {
  double epsilon = 0.1;
  double step_size = 0.025;  // alpha
  std::size_t steps = 10;    // k
  bool random_start = true;
  LossKind loss = LossKind::ce;
  std::uint64_t seed = 0;
  /// Optional clamp of every attacked input to [lo, hi]^d.
  std::optional<std::pair<double, double>> input_box;

  void validate() const;

  /// PGD-10 for training, PGD-20 for evaluation, alpha = eps / 4.
  static AttackConfig pgd_train(double epsilon, std::uint64_t seed = 0);
  static AttackConfig pgd_eval(double epsilon, std::uint64_t seed = 0);
};

/// Scalar function of the input; writes d/dx into grad.
using Objective = std::function<double(std::span<const double> x, Vector& grad)>;

/// Nearest point to candidate with |candidate_i - x_i| <= eps holding exactly
/// in floating point (and inside the input box, when configured).
Vector project_to_ball(std::span<const double> x, std::span<const double> candidate,
                       const AttackConfig& config);

/// sign(0) = 0.
double sign_of(double v);

/// x + eps * sign(grad_x loss), projected.
Vector fgsm(const MlpParams& params, std::span<const double> x, int y,
            const AttackConfig& config, int y_prime = -1);

struct AttackResult {
  Vector x;
  double objective = 0.0;
  /// Best-so-far objective after the start point and after each step.
  std::vector<double> best_trace;
};

/// k signed-gradient ascent steps with projection; returns the best iterate.
AttackResult pgd(const Objective& objective, std::span<const double> x,
                 const AttackConfig& config, std::mt19937_64& rng);

/// Loss of the averaged logits of models.
Objective loss_objective(const ModelRefs& models, LossKind loss, int y, int y_prime = -1);
/// sum_{y' != y} mce(summed logits, y, y'). The samplers attack the summed
/// logits, as does the pool scoring.
Objective summed_mce_objective(const ModelRefs& models, int y);

/// Training tuple (x_i, y, y', delta).
struct AdvTuple {
  std::size_t sample = 0;
  int y = 0;
  int y_false = 0;
  Vector delta;
};

/// Randomness for sample i comes from derived_rng(config.seed, i, stream).
std::vector<AdvTuple> sampler_all(const LabeledDataset& data, const ModelRefs& models,
                                  std::span<const std::size_t> batch,
                                  const AttackConfig& config, std::uint64_t stream);
std::vector<AdvTuple> sampler_rnd(const LabeledDataset& data, const ModelRefs& models,
                                  std::span<const std::size_t> batch,
                                  const AttackConfig& config, std::uint64_t stream);
std::vector<AdvTuple> sampler_max(const LabeledDataset& data, const ModelRefs& models,
                                  std::span<const std::size_t> batch,
                                  const AttackConfig& config, std::uint64_t stream);

/// Finite candidate support for exponential sampling: per (x, y, y') the
/// zero perturbation, r random feasible perturbations, and one PGD
/// perturbation per finished boosting iteration.
class ExpSamplerPool {
 public:
  ExpSamplerPool(const LabeledDataset& data, double epsilon, std::size_t random_count,
                 std::uint64_t seed);

  void add(AdvTuple candidate) { candidates_.push_back(std::move(candidate)); }
  /// Appends the PGD mce perturbation of every (i, y') against models.
  void add_attacks(const LabeledDataset& data, const ModelRefs& models,
                   const AttackConfig& config, std::uint64_t stream);

  std::size_t size() const { return candidates_.size(); }
  const std::vector<AdvTuple>& candidates() const { return candidates_; }

 private:
  std::vector<AdvTuple> candidates_;
};

/// mce(summed logits at x + delta, y, y') for every candidate; zero logits
/// when models is empty.
Vector pool_scores(const ExpSamplerPool& pool, const LabeledDataset& data,
                   const ModelRefs& models);
/// Stabilized softmax of eta * scores.
Vector exp_sampler_probabilities(std::span<const double> scores, double eta);
/// batch_size draws with replacement from exp_sampler_probabilities.
std::vector<AdvTuple> sampler_exp(const ExpSamplerPool& pool, const LabeledDataset& data,
                                  const ModelRefs& models, double eta,
                                  std::size_t batch_size, std::mt19937_64& rng);

enum class SamplerKind { exp, all, rnd, max };
SamplerKind parse_sampler_kind(std::string_view name);
std::string_view to_string(SamplerKind kind);

enum class InitKind { rnd, per };
InitKind parse_init_kind(std::string_view name);
std::string_view to_string(InitKind kind);

/// E SGD steps on attacked mini-batches. ce: PGD-ce perturbations and ce
/// loss. mce_a: Sampler.All perturbations and the mce_a loss. Zero attack
/// steps train on clean inputs.
MlpParams adversarial_training(const LabeledDataset& data,
                               std::span<const std::size_t> layer_sizes,
                               const SgdConfig& sgd, const AttackConfig& attack,
                               LossKind loss);

/// Same procedure starting from given parameters.
MlpParams adversarial_training_from(MlpParams init, const LabeledDataset& data,
                                    const SgdConfig& sgd, const AttackConfig& attack,
                                    LossKind loss, std::uint64_t stage = 1);

struct RobBoostOptions {
  InitKind init = InitKind::rnd;
  /// Loss on the new member alone instead of the running-average ensemble.
  bool individual = false;
};

/// Greedy stagewise baseline: stage t minimizes the adversarial ce of the
/// running average ((t-1)/t) g_{1:t-1} + (1/t) g_theta, uniform weights.
ScoreEnsemble robboost_greedy(const LabeledDataset& data,
                              std::span<const std::size_t> layer_sizes,
                              std::size_t stages, const SgdConfig& sgd,
                              const AttackConfig& attack,
                              const RobBoostOptions& options = {});

/// Two score networks combined at random with weights w and 1 - w.
struct RandomizedEnsemble {
  MlpParams first;
  MlpParams second;
  double weight = 0.5;

  void validate() const;
};

enum class AggregationLevel { logit, probability };

/// logit: ce(w g1 + (1-w) g2, y). probability: -log([w p1 + (1-w) p2]_y).
Objective randomized_objective(const RandomizedEnsemble& ensemble, int y,
                               AggregationLevel level);
Vector randomized_ensemble_attack(const RandomizedEnsemble& ensemble,
                                  std::span<const double> x, int y,
                                  const AttackConfig& config, AggregationLevel level,
                                  std::mt19937_64& rng);

struct RobustEvaluation {
  double clean_accuracy = 0.0;
  double robust_accuracy = 0.0;
  /// Empirical adversarial risk w.r.t. the 0-1 loss (1 - robust_accuracy).
  double adversarial_risk = 0.0;
  /// Mean over samples of the attacked ce loss.
  double adversarial_ce = 0.0;
  /// Per sample: the candidate input the evaluation scored (x or the attack
  /// output, whichever is worse), its loss, and its 0-1 loss.
  std::vector<Vector> attacked;
  Vector per_sample_loss;
  Vector per_sample_error;
};

/// Average-logit rule. A sample counts as robust only when the ensemble is
/// correct at both x (delta = 0) and the PGD output.
RobustEvaluation evaluate_robust_accuracy(const ModelRefs& models,
                                          const LabeledDataset& data,
                                          const AttackConfig& attack);

/// Randomized rule: expected 0-1 loss w l01(g1) + (1-w) l01(g2) in closed form.
RobustEvaluation evaluate_robust_accuracy(const RandomizedEnsemble& ensemble,
                                          const LabeledDataset& data,
                                          const AttackConfig& attack,
                                          AggregationLevel level);

/// Uniform mini-batch indices: distinct when batch_size <= n, otherwise
/// drawn with replacement.
std::vector<std::size_t> sample_batch(std::size_t n, std::size_t batch_size,
                                      std::mt19937_64& rng);

}  // namespace mrb
