#include "mrboost/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "training.hpp"

namespace mrb {

namespace detail {

MlpParams init_params(std::span<const std::size_t> sizes, std::uint64_t seed,
                      std::uint64_t stage) {
  auto rng = derived_rng(seed, stage, kInitSalt);
  return xavier_mlp(sizes, rng);
}

}  // namespace detail

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("attack: epsilon must be finite and >= 0");
  }
  if (!(step_size > 0.0)) throw std::invalid_argument("attack: step_size must be > 0");
  if (steps < 1) throw std::invalid_argument("attack: steps must be >= 1");
  if (input_box && !(input_box->first <= input_box->second)) {
    throw std::invalid_argument("attack: input box must satisfy lo <= hi");
  }
}

AttackConfig AttackConfig::pgd_train(double epsilon, std::uint64_t seed) {
  AttackConfig c;
  c.epsilon = epsilon;
  c.step_size = epsilon > 0.0 ? epsilon / 4.0 : 1e-3;
  c.steps = 10;
  c.seed = seed;
  return c;
}

AttackConfig AttackConfig::pgd_eval(double epsilon, std::uint64_t seed) {
  AttackConfig c = pgd_train(epsilon, seed);
  c.steps = 20;
  return c;
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Vector project_to_ball(std::span<const double> x, std::span<const double> candidate,
                       const AttackConfig& config) {
  const double eps = config.epsilon;
  Vector out(candidate.begin(), candidate.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double c = std::clamp(out[i], x[i] - eps, x[i] + eps);
    if (config.input_box) c = std::clamp(c, config.input_box->first, config.input_box->second);
    // Rounding in x +- eps can overshoot by an ulp; walk back toward x.
    while (c - x[i] > eps) c = std::nextafter(c, x[i]);
    while (x[i] - c > eps) c = std::nextafter(c, x[i]);
    out[i] = c;
  }
  return out;
}

Vector fgsm(const MlpParams& params, std::span<const double> x, int y,
            const AttackConfig& config, int y_prime) {
  if (!(config.epsilon >= 0.0)) throw std::invalid_argument("fgsm: epsilon must be >= 0");
  const InputGradient g = grad_wrt_input(params, config.loss, x, y, y_prime);
  Vector candidate(x.begin(), x.end());
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    candidate[i] = x[i] + config.epsilon * sign_of(g.grad[i]);
  }
  return project_to_ball(x, candidate, config);
}

AttackResult pgd(const Objective& objective, std::span<const double> x,
                 const AttackConfig& config, std::mt19937_64& rng) {
  config.validate();
  Vector current(x.begin(), x.end());
  if (config.random_start && config.epsilon > 0.0) {
    std::uniform_real_distribution<double> dist(-config.epsilon, config.epsilon);
    for (std::size_t i = 0; i < current.size(); ++i) current[i] = x[i] + dist(rng);
  }
  current = project_to_ball(x, current, config);

  Vector grad;
  double value = objective(current, grad);
  AttackResult result{current, value, {value}};
  for (std::size_t s = 0; s < config.steps; ++s) {
    Vector next(current);
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] = current[i] + config.step_size * sign_of(grad[i]);
    }
    current = project_to_ball(x, next, config);
    value = objective(current, grad);
    if (value > result.objective) {
      result.objective = value;
      result.x = current;
    }
    result.best_trace.push_back(result.objective);
  }
  return result;
}

Objective loss_objective(const ModelRefs& models, LossKind loss, int y, int y_prime) {
  return [models, loss, y, y_prime](std::span<const double> x, Vector& grad) {
    InputGradient g = ensemble_input_grad(models, loss, x, y, y_prime);
    grad = std::move(g.grad);
    return g.loss;
  };
}

namespace {

/// Objective of the summed member logits; loss(logits, dlogits) fills dlogits.
template <typename Loss>
Objective summed_logit_objective(const ModelRefs& models, Loss loss) {
  if (models.empty()) throw std::invalid_argument("attack: no models");
  return [models, loss](std::span<const double> x, Vector& grad) {
    Vector logits = mlp_forward(*models.front(), x);
    for (std::size_t m = 1; m < models.size(); ++m) {
      const Vector g = mlp_forward(*models[m], x);
      for (std::size_t j = 0; j < logits.size(); ++j) logits[j] += g[j];
    }
    Vector dlogits(logits.size(), 0.0);
    const double value = loss(logits, dlogits);
    grad.assign(x.size(), 0.0);
    for (const MlpParams* m : models) {
      const Vector gx = mlp_backward(*m, x, dlogits, nullptr);
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += gx[i];
    }
    return value;
  };
}

Objective pairwise_mce_objective(const ModelRefs& models, int y, int y_prime) {
  return summed_logit_objective(models, [y, y_prime](const Vector& g, Vector& d) {
    d = mce_grad(g, y, y_prime);
    return mce_loss(g, y, y_prime);
  });
}

}  // namespace

Objective summed_mce_objective(const ModelRefs& models, int y) {
  return summed_logit_objective(models, [y](const Vector& g, Vector& d) {
    const int k = static_cast<int>(g.size());
    double total = 0.0;
    for (int yp = 0; yp < k; ++yp) {
      if (yp == y) continue;
      total += mce_loss(g, y, yp);
      const Vector gy = mce_grad(g, y, yp);
      for (int j = 0; j < k; ++j) d[j] += gy[j];
    }
    return total;
  });
}

namespace {

Vector delta_of(std::span<const double> attacked, std::span<const double> x) {
  Vector d(x.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = attacked[i] - x[i];
  return d;
}

Vector shifted(const Vector& x, const Vector& delta) {
  Vector out(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += delta[i];
  return out;
}

int draw_false_label(int y, int k, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(0, k - 2);
  const int r = dist(rng);
  return r >= y ? r + 1 : r;
}

}  // namespace

std::vector<AdvTuple> sampler_all(const LabeledDataset& data, const ModelRefs& models,
                                  std::span<const std::size_t> batch,
                                  const AttackConfig& config, std::uint64_t stream) {
  std::vector<AdvTuple> out;
  out.reserve(batch.size() * (data.num_classes() - 1));
  for (std::size_t i : batch) {
    auto rng = derived_rng(config.seed, i, stream);
    const int y = data.y(i);
    const AttackResult r = pgd(summed_mce_objective(models, y), data.x(i), config, rng);
    const Vector delta = delta_of(r.x, data.x(i));
    for (int yp = 0; yp < data.num_classes(); ++yp) {
      if (yp != y) out.push_back({i, y, yp, delta});
    }
  }
  return out;
}

std::vector<AdvTuple> sampler_rnd(const LabeledDataset& data, const ModelRefs& models,
                                  std::span<const std::size_t> batch,
                                  const AttackConfig& config, std::uint64_t stream) {
  std::vector<AdvTuple> out;
  out.reserve(batch.size());
  for (std::size_t i : batch) {
    auto rng = derived_rng(config.seed, i, stream);
    const int y = data.y(i);
    // The y' draw comes from its own stream so the attack start matches
    // the other samplers.
    auto label_rng = derived_rng(config.seed ^ 0x5eedu, i, stream);
    const int yp = draw_false_label(y, data.num_classes(), label_rng);
    const AttackResult r =
        pgd(pairwise_mce_objective(models, y, yp), data.x(i), config, rng);
    out.push_back({i, y, yp, delta_of(r.x, data.x(i))});
  }
  return out;
}

std::vector<AdvTuple> sampler_max(const LabeledDataset& data, const ModelRefs& models,
                                  std::span<const std::size_t> batch,
                                  const AttackConfig& config, std::uint64_t stream) {
  std::vector<AdvTuple> out;
  out.reserve(batch.size());
  for (std::size_t i : batch) {
    const int y = data.y(i);
    AdvTuple best{i, y, -1, {}};
    double best_value = -std::numeric_limits<double>::infinity();
    for (int yp = 0; yp < data.num_classes(); ++yp) {
      if (yp == y) continue;
      auto rng = derived_rng(config.seed, i, stream);
      const AttackResult r =
          pgd(pairwise_mce_objective(models, y, yp), data.x(i), config, rng);
      if (r.objective > best_value) {
        best_value = r.objective;
        best.y_false = yp;
        best.delta = delta_of(r.x, data.x(i));
      }
    }
    out.push_back(std::move(best));
  }
  return out;
}

ExpSamplerPool::ExpSamplerPool(const LabeledDataset& data, double epsilon,
                               std::size_t random_count, std::uint64_t seed) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("exp pool: epsilon must be >= 0");
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto rng = derived_rng(seed, i, detail::kPoolSalt);
    std::uniform_real_distribution<double> dist(-epsilon, epsilon);
    const int y = data.y(i);
    for (int yp = 0; yp < data.num_classes(); ++yp) {
      if (yp == y) continue;
      candidates_.push_back({i, y, yp, Vector(data.dim(), 0.0)});
      for (std::size_t r = 0; r < random_count; ++r) {
        Vector d(data.dim());
        for (double& v : d) v = epsilon > 0.0 ? dist(rng) : 0.0;
        candidates_.push_back({i, y, yp, std::move(d)});
      }
    }
  }
}

void ExpSamplerPool::add_attacks(const LabeledDataset& data, const ModelRefs& models,
                                 const AttackConfig& config, std::uint64_t stream) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = data.y(i);
    for (int yp = 0; yp < data.num_classes(); ++yp) {
      if (yp == y) continue;
      auto rng = derived_rng(config.seed, i, stream);
      const AttackResult r =
          pgd(pairwise_mce_objective(models, y, yp), data.x(i), config, rng);
      candidates_.push_back({i, y, yp, delta_of(r.x, data.x(i))});
    }
  }
}

Vector pool_scores(const ExpSamplerPool& pool, const LabeledDataset& data,
                   const ModelRefs& models) {
  Vector scores;
  scores.reserve(pool.size());
  const auto k = static_cast<std::size_t>(data.num_classes());
  for (const AdvTuple& c : pool.candidates()) {
    Vector summed(k, 0.0);
    if (!models.empty()) {
      summed = average_logits(models, shifted(data.x(c.sample), c.delta));
      for (double& v : summed) v *= static_cast<double>(models.size());
    }
    scores.push_back(mce_loss(summed, c.y, c.y_false));
  }
  return scores;
}

Vector exp_sampler_probabilities(std::span<const double> scores, double eta) {
  if (scores.empty()) throw std::invalid_argument("exp sampler: empty pool");
  Vector scaled(scores.begin(), scores.end());
  for (double& s : scaled) s *= eta;
  return softmax(scaled);
}

std::vector<AdvTuple> sampler_exp(const ExpSamplerPool& pool, const LabeledDataset& data,
                                  const ModelRefs& models, double eta,
                                  std::size_t batch_size, std::mt19937_64& rng) {
  if (pool.size() == 0) throw std::invalid_argument("exp sampler: empty pool");
  const Vector p = exp_sampler_probabilities(pool_scores(pool, data, models), eta);
  std::discrete_distribution<std::size_t> dist(p.begin(), p.end());
  std::vector<AdvTuple> out;
  out.reserve(batch_size);
  for (std::size_t b = 0; b < batch_size; ++b) out.push_back(pool.candidates()[dist(rng)]);
  return out;
}

SamplerKind parse_sampler_kind(std::string_view name) {
  if (name == "exp") return SamplerKind::exp;
  if (name == "all") return SamplerKind::all;
  if (name == "rnd") return SamplerKind::rnd;
  if (name == "max") return SamplerKind::max;
  throw std::invalid_argument("unknown sampler '" + std::string(name) + "'");
}

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::exp: return "exp";
    case SamplerKind::all: return "all";
    case SamplerKind::rnd: return "rnd";
    case SamplerKind::max: return "max";
  }
  return "?";
}

InitKind parse_init_kind(std::string_view name) {
  if (name == "rnd" || name == "RndInit") return InitKind::rnd;
  if (name == "per" || name == "PerInit") return InitKind::per;
  throw std::invalid_argument("unknown init '" + std::string(name) + "'");
}

std::string_view to_string(InitKind kind) { return kind == InitKind::rnd ? "rnd" : "per"; }

std::vector<std::size_t> sample_batch(std::size_t n, std::size_t batch_size,
                                      std::mt19937_64& rng) {
  std::vector<std::size_t> out;
  out.reserve(batch_size);
  if (batch_size <= n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t b = 0; b < batch_size; ++b) {
      std::uniform_int_distribution<std::size_t> dist(b, n - 1);
      std::swap(idx[b], idx[dist(rng)]);
      out.push_back(idx[b]);
    }
  } else {
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    for (std::size_t b = 0; b < batch_size; ++b) out.push_back(dist(rng));
  }
  return out;
}

namespace {

bool attack_enabled(const AttackConfig& attack) {
  return attack.steps > 0 && attack.epsilon > 0.0;
}

/// Adversarial ce training of g_theta inside the running average
/// ((t-1)/t) avg(prefix) + (1/t) g_theta.
MlpParams train_running_average_ce(const ModelRefs& prefix, std::size_t t, MlpParams params,
                                   const LabeledDataset& data, const SgdConfig& sgd,
                                   const AttackConfig& attack, std::uint64_t stage) {
  sgd.validate();
  const double new_weight = prefix.empty() ? 1.0 : 1.0 / static_cast<double>(t);
  const double prefix_weight = 1.0 - new_weight;

  auto combined = [&](std::span<const double> x) {
    Vector logits = mlp_forward(params, x);
    if (!prefix.empty()) {
      const Vector old = average_logits(prefix, x);
      for (std::size_t j = 0; j < logits.size(); ++j) {
        logits[j] = prefix_weight * old[j] + new_weight * logits[j];
      }
    }
    return logits;
  };

  SgdOptimizer optimizer(sgd, params);
  auto batch_rng = derived_rng(sgd.seed, stage, detail::kBatchSalt);
  for (std::size_t step = 0; step < sgd.iterations; ++step) {
    const auto batch = sample_batch(data.size(), sgd.batch_size, batch_rng);
    MlpParams grad = params.zeros_like();
    const double scale = 1.0 / static_cast<double>(batch.size());
    for (std::size_t i : batch) {
      const int y = data.y(i);
      Vector input = data.x(i);
      if (attack_enabled(attack)) {
        Objective objective = [&](std::span<const double> x, Vector& gx) {
          const Vector logits = combined(x);
          const Vector dl = ce_grad(logits, y);
          gx = mlp_backward(params, x, dl, nullptr, 1.0);
          for (double& v : gx) v *= new_weight;
          if (!prefix.empty()) {
            Vector dprefix(dl);
            for (double& v : dprefix) v *= prefix_weight / static_cast<double>(prefix.size());
            for (const MlpParams* m : prefix) {
              const Vector g = mlp_backward(*m, x, dprefix, nullptr);
              for (std::size_t k = 0; k < gx.size(); ++k) gx[k] += g[k];
            }
          }
          return ce_loss(logits, y);
        };
        auto rng = derived_rng(attack.seed, i, detail::attack_stream(stage, step));
        input = pgd(objective, data.x(i), attack, rng).x;
      }
      Vector dl = ce_grad(combined(input), y);
      for (double& v : dl) v *= new_weight;
      mlp_backward(params, input, dl, &grad, scale);
    }
    optimizer.step(params, grad);
  }
  return params;
}

MlpParams train_mce_a(MlpParams params, const LabeledDataset& data, const SgdConfig& sgd,
                      const AttackConfig& attack, std::uint64_t stage) {
  sgd.validate();
  SgdOptimizer optimizer(sgd, params);
  auto batch_rng = derived_rng(sgd.seed, stage, detail::kBatchSalt);
  for (std::size_t step = 0; step < sgd.iterations; ++step) {
    const auto batch = sample_batch(data.size(), sgd.batch_size, batch_rng);
    MlpParams grad = params.zeros_like();
    const double scale = 1.0 / static_cast<double>(batch.size());
    std::vector<Vector> inputs;
    if (attack_enabled(attack)) {
      const ModelRefs self{&params};
      for (std::size_t i : batch) {
        auto rng = derived_rng(attack.seed, i, detail::attack_stream(stage, step));
        inputs.push_back(pgd(summed_mce_objective(self, data.y(i)), data.x(i), attack, rng).x);
      }
    } else {
      for (std::size_t i : batch) inputs.push_back(data.x(i));
    }
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const Vector logits = mlp_forward(params, inputs[b]);
      mlp_backward(params, inputs[b], mce_a_grad(logits, data.y(batch[b])), &grad, scale);
    }
    optimizer.step(params, grad);
  }
  return params;
}

}  // namespace

MlpParams adversarial_training_from(MlpParams init, const LabeledDataset& data,
                                    const SgdConfig& sgd, const AttackConfig& attack,
                                    LossKind loss, std::uint64_t stage) {
  if (attack.steps > 0) attack.validate();
  switch (loss) {
    case LossKind::ce:
      return train_running_average_ce({}, 1, std::move(init), data, sgd, attack, stage);
    case LossKind::mce_a:
      return train_mce_a(std::move(init), data, sgd, attack, stage);
    case LossKind::mce:
      break;
  }
  throw std::invalid_argument("adversarial training: loss must be ce or mce_a");
}

MlpParams adversarial_training(const LabeledDataset& data,
                               std::span<const std::size_t> layer_sizes,
                               const SgdConfig& sgd, const AttackConfig& attack,
                               LossKind loss) {
  return adversarial_training_from(detail::init_params(layer_sizes, sgd.seed, 1), data, sgd,
                                   attack, loss, 1);
}

ScoreEnsemble robboost_greedy(const LabeledDataset& data,
                              std::span<const std::size_t> layer_sizes, std::size_t stages,
                              const SgdConfig& sgd, const AttackConfig& attack,
                              const RobBoostOptions& options) {
  if (stages < 1) throw std::invalid_argument("robboost: T must be >= 1");
  if (attack.steps > 0) attack.validate();
  ScoreEnsemble ensemble;
  for (std::size_t t = 1; t <= stages; ++t) {
    MlpParams init = (options.init == InitKind::per && t > 1)
                         ? ensemble.member(t - 2)
                         : detail::init_params(layer_sizes, sgd.seed, t);
    const ModelRefs prefix = options.individual ? ModelRefs{} : refs(ensemble);
    ensemble.add(train_running_average_ce(prefix, t, std::move(init), data, sgd, attack, t));
  }
  return ensemble;
}

void RandomizedEnsemble::validate() const {
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw std::invalid_argument("randomized ensemble: weight must be in [0, 1]");
  }
}

Objective randomized_objective(const RandomizedEnsemble& ensemble, int y,
                               AggregationLevel level) {
  ensemble.validate();
  return [&ensemble, y, level](std::span<const double> x, Vector& grad) {
    const double w = ensemble.weight;
    const Vector g1 = mlp_forward(ensemble.first, x);
    const Vector g2 = mlp_forward(ensemble.second, x);
    const std::size_t k = g1.size();
    Vector d1(k), d2(k);
    double value = 0.0;
    if (level == AggregationLevel::logit) {
      Vector mix(k);
      for (std::size_t j = 0; j < k; ++j) mix[j] = w * g1[j] + (1.0 - w) * g2[j];
      value = ce_loss(mix, y);
      const Vector dl = ce_grad(mix, y);
      for (std::size_t j = 0; j < k; ++j) {
        d1[j] = w * dl[j];
        d2[j] = (1.0 - w) * dl[j];
      }
    } else {
      // The mixture already sums to one, so the normalizer is dropped.
      const Vector p1 = softmax(g1);
      const Vector p2 = softmax(g2);
      const double mix_y = w * p1[y] + (1.0 - w) * p2[y];
      value = -std::log(std::max(mix_y, std::numeric_limits<double>::min()));
      const double inv = -1.0 / std::max(mix_y, std::numeric_limits<double>::min());
      for (std::size_t j = 0; j < k; ++j) {
        const double kron = static_cast<int>(j) == y ? 1.0 : 0.0;
        d1[j] = inv * w * p1[y] * (kron - p1[j]);
        d2[j] = inv * (1.0 - w) * p2[y] * (kron - p2[j]);
      }
    }
    grad = mlp_backward(ensemble.first, x, d1, nullptr);
    const Vector gx2 = mlp_backward(ensemble.second, x, d2, nullptr);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += gx2[i];
    return value;
  };
}

Vector randomized_ensemble_attack(const RandomizedEnsemble& ensemble,
                                  std::span<const double> x, int y,
                                  const AttackConfig& config, AggregationLevel level,
                                  std::mt19937_64& rng) {
  return pgd(randomized_objective(ensemble, y, level), x, config, rng).x;
}

namespace {

double zero_one(const Vector& logits, int y) {
  return argmax_classify(logits) == y ? 0.0 : 1.0;
}

double randomized_error(const RandomizedEnsemble& e, std::span<const double> x, int y) {
  return e.weight * zero_one(mlp_forward(e.first, x), y) +
         (1.0 - e.weight) * zero_one(mlp_forward(e.second, x), y);
}

void finish(RobustEvaluation& r, std::size_t clean_correct, std::size_t n) {
  const double dn = static_cast<double>(n);
  r.clean_accuracy = clean_correct / dn;
  double err = 0.0, ce = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    err += r.per_sample_error[i];
    ce += r.per_sample_loss[i];
  }
  r.adversarial_risk = err / dn;
  r.robust_accuracy = 1.0 - r.adversarial_risk;
  r.adversarial_ce = ce / dn;
}

}  // namespace

RobustEvaluation evaluate_robust_accuracy(const ModelRefs& models,
                                          const LabeledDataset& data,
                                          const AttackConfig& attack) {
  RobustEvaluation r;
  std::size_t clean_correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = data.y(i);
    const Vector clean_logits = average_logits(models, data.x(i));
    const double clean_err = zero_one(clean_logits, y);
    if (clean_err == 0.0) ++clean_correct;
    Vector chosen = data.x(i);
    double err = clean_err;
    double loss = ce_loss(clean_logits, y);
    if (attack.epsilon > 0.0) {
      auto rng = derived_rng(attack.seed, i, 0);
      const AttackResult a = pgd(loss_objective(models, LossKind::ce, y), data.x(i), attack, rng);
      const Vector adv_logits = average_logits(models, a.x);
      const double adv_err = zero_one(adv_logits, y);
      if (adv_err > err || (adv_err == err && ce_loss(adv_logits, y) > loss)) {
        chosen = a.x;
        err = adv_err;
        loss = ce_loss(adv_logits, y);
      }
    }
    r.attacked.push_back(std::move(chosen));
    r.per_sample_error.push_back(err);
    r.per_sample_loss.push_back(loss);
  }
  finish(r, clean_correct, data.size());
  return r;
}

RobustEvaluation evaluate_robust_accuracy(const RandomizedEnsemble& ensemble,
                                          const LabeledDataset& data,
                                          const AttackConfig& attack,
                                          AggregationLevel level) {
  ensemble.validate();
  RobustEvaluation r;
  double clean_correct = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = data.y(i);
    const double clean_err = randomized_error(ensemble, data.x(i), y);
    clean_correct += 1.0 - clean_err;
    Vector chosen = data.x(i);
    double err = clean_err;
    Vector unused;
    const Objective objective = randomized_objective(ensemble, y, level);
    double loss = objective(data.x(i), unused);
    if (attack.epsilon > 0.0) {
      auto rng = derived_rng(attack.seed, i, 0);
      const AttackResult a = pgd(objective, data.x(i), attack, rng);
      const double adv_err = randomized_error(ensemble, a.x, y);
      if (adv_err > err || (adv_err == err && a.objective > loss)) {
        chosen = a.x;
        err = adv_err;
        loss = a.objective;
      }
    }
    r.attacked.push_back(std::move(chosen));
    r.per_sample_error.push_back(err);
    r.per_sample_loss.push_back(loss);
  }
  const double dn = static_cast<double>(data.size());
  finish(r, 0, data.size());
  r.clean_accuracy = clean_correct / dn;
  return r;
}

}  // namespace mrb
