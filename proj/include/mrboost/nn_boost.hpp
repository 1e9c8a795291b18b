#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mrboost/core.hpp"
#include "mrboost/nn.hpp"
#include "mrboost/robust.hpp"

namespace mrb {

struct NnBoostOptions {
  SamplerKind sampler = SamplerKind::all;
  InitKind init = InitKind::rnd;
  /// Hidden widths; the input and output sizes come from the data.
  std::vector<std::size_t> hidden = {64, 64};
  /// Temperature of the exponential sampler.
  double eta = 1.0;
  /// Random perturbations per (x, y, y') in the exponential sampler's pool.
  std::size_t pool_random = 8;
  /// Per-iteration metrics are computed on this set when given.
  const LabeledDataset* eval_data = nullptr;
  std::optional<AttackConfig> eval_attack;
};

struct NnBoostIteration {
  std::size_t t = 0;
  /// Mean training mce over the iteration's SGD steps.
  double train_loss = 0.0;
  double clean_accuracy = 0.0;
  double robust_accuracy = 0.0;
};

struct NnBoostResult {
  ScoreEnsemble ensemble;
  std::vector<NnBoostIteration> iterations;
};

/// Boosting with score networks: stage t trains a fresh (rnd) or warm-started
/// (per) network on mce over tuples drawn by the sampler. The all, rnd and
/// max samplers attack the previous members together with the network being
/// trained. Zero SGD iterations leave each stage at its initialization.
NnBoostResult mrboost_nn_run(const LabeledDataset& data, const PerturbationModel& perturbations,
                             std::size_t rounds, const SgdConfig& sgd,
                             const AttackConfig& attack, const NnBoostOptions& options = {});

std::vector<std::size_t> layer_sizes_for(const LabeledDataset& data,
                                         const std::vector<std::size_t>& hidden);

}  // namespace mrb
