#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mrboost/core.hpp"
#include "mrboost/losses.hpp"

namespace mrb {

struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  Vector weight;  // outputs x inputs, row-major
  Vector bias;

  bool operator==(const DenseLayer&) const = default;
};

/// Multilayer perceptron with rectifier hidden layers and identity output.
struct MlpParams {
  std::vector<DenseLayer> layers;

  std::vector<std::size_t> layer_sizes() const;
  std::size_t input_dim() const { return layers.front().inputs; }
  std::size_t num_classes() const { return layers.back().outputs; }
  std::size_t num_parameters() const;

  /// Same shapes, all zeros.
  MlpParams zeros_like() const;
  /// this += scale * other; shapes must match.
  void axpy(double scale, const MlpParams& other);

  bool operator==(const MlpParams&) const = default;
};

MlpParams zero_mlp(std::span<const std::size_t> sizes);
/// Uniform(-a, a) weights with a = sqrt(6 / (fan_in + fan_out)), zero biases.
MlpParams xavier_mlp(std::span<const std::size_t> sizes, std::mt19937_64& rng);

Vector mlp_forward(const MlpParams& params, std::span<const double> x);

/// Reverse pass for a given d loss / d logits. Accumulates scale * d/dtheta
/// into param_grad when non-null and returns d/dx.
Vector mlp_backward(const MlpParams& params, std::span<const double> x,
                    std::span<const double> dlogits, MlpParams* param_grad,
                    double scale = 1.0);

struct ParamGradient {
  double loss = 0.0;
  MlpParams grad;
};

struct InputGradient {
  double loss = 0.0;
  Vector grad;
};

/// y_prime is used by LossKind::mce only.
ParamGradient grad_wrt_params(const MlpParams& params, LossKind loss,
                              std::span<const double> x, int y, int y_prime = -1);
InputGradient grad_wrt_input(const MlpParams& params, LossKind loss,
                             std::span<const double> x, int y, int y_prime = -1);

struct SgdConfig {
  double step_size = 0.05;
  std::size_t iterations = 2000;
  std::size_t batch_size = 64;
  double momentum = 0.0;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Heavy-ball SGD with L2 weight decay folded into the gradient.
class SgdOptimizer {
 public:
  SgdOptimizer(const SgdConfig& config, const MlpParams& shape);
  void step(MlpParams& params, const MlpParams& grad);

 private:
  double step_size_;
  double momentum_;
  double weight_decay_;
  MlpParams velocity_;
};

/// Uniform average of member logits.
class ScoreEnsemble {
 public:
  ScoreEnsemble() = default;
  explicit ScoreEnsemble(std::vector<MlpParams> members);

  void add(MlpParams member) { members_.push_back(std::move(member)); }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const MlpParams& member(std::size_t t) const { return members_[t]; }
  const std::vector<MlpParams>& members() const { return members_; }

  Vector logits(std::span<const double> x) const;
  int predict(std::span<const double> x) const;

 private:
  std::vector<MlpParams> members_;
};

/// Non-owning view of models whose logits are averaged.
using ModelRefs = std::vector<const MlpParams*>;

ModelRefs refs(const ScoreEnsemble& ensemble);
Vector average_logits(const ModelRefs& models, std::span<const double> x);
/// Loss of the averaged logits and its gradient with respect to x.
InputGradient ensemble_input_grad(const ModelRefs& models, LossKind loss,
                                  std::span<const double> x, int y, int y_prime = -1);

/// Text checkpoint:
///   mrboost-mlp 1
///   layers <L>
///   sizes <d> <h1> ... <K>
///   then per layer the weight row-major followed by the bias, one value per
///   line with 17 significant digits.
void save_checkpoint(std::ostream& out, const MlpParams& params);
MlpParams load_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const MlpParams& params);
MlpParams load_checkpoint(const std::string& path);

/// Independent stream for (seed, index, salt).
std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t index,
                            std::uint64_t salt = 0);

}  // namespace mrb
