#include "mrboost/nn_boost.hpp"

#include <stdexcept>

#include "training.hpp"

namespace mrb {

std::vector<std::size_t> layer_sizes_for(const LabeledDataset& data,
                                         const std::vector<std::size_t>& hidden) {
  std::vector<std::size_t> sizes{data.dim()};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(static_cast<std::size_t>(data.num_classes()));
  return sizes;
}

namespace {

Vector shifted(const Vector& x, const Vector& delta) {
  Vector out(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += delta[i];
  return out;
}

}  // namespace

NnBoostResult mrboost_nn_run(const LabeledDataset& data, const PerturbationModel& perturbations,
                             std::size_t rounds, const SgdConfig& sgd,
                             const AttackConfig& attack, const NnBoostOptions& options) {
  if (perturbations.is_grid()) {
    throw std::invalid_argument("nn boosting: perturbations must be continuous");
  }
  if (rounds < 1) throw std::invalid_argument("nn boosting: T must be >= 1");
  if (sgd.iterations > 0) sgd.validate();
  if (!(options.eta >= 0.0)) throw std::invalid_argument("nn boosting: eta must be >= 0");
  AttackConfig config = attack;
  config.epsilon = perturbations.epsilon();
  config.validate();

  const auto sizes = layer_sizes_for(data, options.hidden);
  std::optional<ExpSamplerPool> pool;
  if (options.sampler == SamplerKind::exp) {
    pool.emplace(data, config.epsilon, options.pool_random, config.seed);
  }

  NnBoostResult result;
  for (std::size_t t = 1; t <= rounds; ++t) {
    MlpParams params = (options.init == InitKind::per && t > 1)
                           ? result.ensemble.member(t - 2)
                           : detail::init_params(sizes, sgd.seed, t);
    const ModelRefs previous = refs(result.ensemble);

    std::optional<Vector> exp_probabilities;
    if (pool) exp_probabilities = exp_sampler_probabilities(pool_scores(*pool, data, previous),
                                                            options.eta);
    auto batch_rng = derived_rng(sgd.seed, t, detail::kBatchSalt);
    auto draw_rng = derived_rng(sgd.seed, t, detail::kExpDrawSalt);

    double loss_sum = 0.0;
    if (sgd.iterations > 0) {
      SgdOptimizer optimizer(sgd, params);
      for (std::size_t step = 0; step < sgd.iterations; ++step) {
        std::vector<AdvTuple> tuples;
        if (pool) {
          std::discrete_distribution<std::size_t> dist(exp_probabilities->begin(),
                                                       exp_probabilities->end());
          for (std::size_t b = 0; b < sgd.batch_size; ++b) {
            tuples.push_back(pool->candidates()[dist(draw_rng)]);
          }
        } else {
          const auto batch = sample_batch(data.size(), sgd.batch_size, batch_rng);
          ModelRefs attacked = previous;
          attacked.push_back(&params);
          const auto stream = detail::attack_stream(t, step);
          switch (options.sampler) {
            case SamplerKind::all: tuples = sampler_all(data, attacked, batch, config, stream); break;
            case SamplerKind::rnd: tuples = sampler_rnd(data, attacked, batch, config, stream); break;
            case SamplerKind::max: tuples = sampler_max(data, attacked, batch, config, stream); break;
            case SamplerKind::exp: break;
          }
        }
        MlpParams grad = params.zeros_like();
        const double scale = 1.0 / static_cast<double>(tuples.size());
        double step_loss = 0.0;
        for (const AdvTuple& tuple : tuples) {
          const Vector input = shifted(data.x(tuple.sample), tuple.delta);
          const Vector logits = mlp_forward(params, input);
          step_loss += mce_loss(logits, tuple.y, tuple.y_false);
          mlp_backward(params, input, mce_grad(logits, tuple.y, tuple.y_false), &grad, scale);
        }
        loss_sum += step_loss * scale;
        optimizer.step(params, grad);
      }
    }
    result.ensemble.add(std::move(params));
    if (pool) pool->add_attacks(data, refs(result.ensemble), config, detail::kPoolSalt + t);

    NnBoostIteration it;
    it.t = t;
    it.train_loss = sgd.iterations > 0 ? loss_sum / static_cast<double>(sgd.iterations) : 0.0;
    if (options.eval_data != nullptr) {
      const AttackConfig eval_attack =
          options.eval_attack.value_or(AttackConfig::pgd_eval(config.epsilon, config.seed));
      const RobustEvaluation e =
          evaluate_robust_accuracy(refs(result.ensemble), *options.eval_data, eval_attack);
      it.clean_accuracy = e.clean_accuracy;
      it.robust_accuracy = e.robust_accuracy;
    }
    result.iterations.push_back(it);
  }
  return result;
}

}  // namespace mrb
