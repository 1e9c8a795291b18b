#include "mrboost/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace mrb {

namespace {

void check_shapes(const MlpParams& a, const MlpParams& b) {
  if (a.layers.size() != b.layers.size()) {
    throw std::invalid_argument("mlp: layer count mismatch");
  }
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    if (a.layers[l].inputs != b.layers[l].inputs ||
        a.layers[l].outputs != b.layers[l].outputs) {
      throw std::invalid_argument("mlp: layer shape mismatch");
    }
  }
}

void check_sizes(std::span<const std::size_t> sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("mlp: need at least input and output sizes");
  for (std::size_t s : sizes) {
    if (s == 0) throw std::invalid_argument("mlp: zero-width layer");
  }
}

}  // namespace

std::vector<std::size_t> MlpParams::layer_sizes() const {
  std::vector<std::size_t> sizes{layers.front().inputs};
  for (const auto& l : layers) sizes.push_back(l.outputs);
  return sizes;
}

std::size_t MlpParams::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

MlpParams MlpParams::zeros_like() const {
  MlpParams out = *this;
  for (auto& l : out.layers) {
    std::fill(l.weight.begin(), l.weight.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
  return out;
}

void MlpParams::axpy(double scale, const MlpParams& other) {
  check_shapes(*this, other);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& w = layers[l].weight;
    const auto& ow = other.layers[l].weight;
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += scale * ow[k];
    auto& b = layers[l].bias;
    const auto& ob = other.layers[l].bias;
    for (std::size_t k = 0; k < b.size(); ++k) b[k] += scale * ob[k];
  }
}

MlpParams zero_mlp(std::span<const std::size_t> sizes) {
  check_sizes(sizes);
  MlpParams p;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    p.layers.push_back({sizes[l], sizes[l + 1], Vector(sizes[l] * sizes[l + 1], 0.0),
                        Vector(sizes[l + 1], 0.0)});
  }
  return p;
}

MlpParams xavier_mlp(std::span<const std::size_t> sizes, std::mt19937_64& rng) {
  MlpParams p = zero_mlp(sizes);
  for (auto& l : p.layers) {
    const double a = std::sqrt(6.0 / static_cast<double>(l.inputs + l.outputs));
    std::uniform_real_distribution<double> dist(-a, a);
    for (double& w : l.weight) w = dist(rng);
  }
  return p;
}

namespace {

/// Pre-activations of every layer; the last entry holds the logits.
std::vector<Vector> forward_trace(const MlpParams& params, std::span<const double> x) {
  if (x.size() != params.input_dim()) {
    throw std::invalid_argument("mlp: input dimension mismatch");
  }
  std::vector<Vector> pre;
  pre.reserve(params.layers.size());
  Vector act(x.begin(), x.end());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const DenseLayer& layer = params.layers[l];
    Vector z(layer.bias);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      const double* w = layer.weight.data() + o * layer.inputs;
      double s = 0.0;
      for (std::size_t i = 0; i < layer.inputs; ++i) s += w[i] * act[i];
      z[o] += s;
    }
    pre.push_back(z);
    if (l + 1 < params.layers.size()) {
      for (double& v : z) v = std::max(v, 0.0);
    }
    act = std::move(z);
  }
  return pre;
}

}  // namespace

Vector mlp_forward(const MlpParams& params, std::span<const double> x) {
  return forward_trace(params, x).back();
}

Vector mlp_backward(const MlpParams& params, std::span<const double> x,
                    std::span<const double> dlogits, MlpParams* param_grad,
                    double scale) {
  if (dlogits.size() != params.num_classes()) {
    throw std::invalid_argument("mlp: logit gradient length mismatch");
  }
  if (param_grad != nullptr) check_shapes(params, *param_grad);
  const std::vector<Vector> pre = forward_trace(params, x);
  Vector delta(dlogits.begin(), dlogits.end());
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const DenseLayer& layer = params.layers[l];
    if (param_grad != nullptr) {
      DenseLayer& g = param_grad->layers[l];
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        const double d = scale * delta[o];
        if (d == 0.0) continue;
        g.bias[o] += d;
        double* gw = g.weight.data() + o * layer.inputs;
        if (l == 0) {
          for (std::size_t i = 0; i < layer.inputs; ++i) gw[i] += d * x[i];
        } else {
          const Vector& prev = pre[l - 1];
          for (std::size_t i = 0; i < layer.inputs; ++i) {
            gw[i] += d * std::max(prev[i], 0.0);
          }
        }
      }
    }
    Vector below(layer.inputs, 0.0);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* w = layer.weight.data() + o * layer.inputs;
      for (std::size_t i = 0; i < layer.inputs; ++i) below[i] += w[i] * d;
    }
    if (l > 0) {
      const Vector& prev = pre[l - 1];
      for (std::size_t i = 0; i < below.size(); ++i) {
        if (prev[i] <= 0.0) below[i] = 0.0;
      }
    }
    delta = std::move(below);
  }
  return delta;
}

ParamGradient grad_wrt_params(const MlpParams& params, LossKind loss,
                              std::span<const double> x, int y, int y_prime) {
  const LossValue v = evaluate_loss(loss, mlp_forward(params, x), y, y_prime);
  ParamGradient out{v.value, params.zeros_like()};
  mlp_backward(params, x, v.grad, &out.grad);
  return out;
}

InputGradient grad_wrt_input(const MlpParams& params, LossKind loss,
                             std::span<const double> x, int y, int y_prime) {
  const LossValue v = evaluate_loss(loss, mlp_forward(params, x), y, y_prime);
  return {v.value, mlp_backward(params, x, v.grad, nullptr)};
}

void SgdConfig::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("sgd: step_size must be > 0");
  if (batch_size < 1) throw std::invalid_argument("sgd: batch_size must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("sgd: momentum must be in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("sgd: weight_decay must be >= 0");
}

SgdOptimizer::SgdOptimizer(const SgdConfig& config, const MlpParams& shape)
    : step_size_(config.step_size),
      momentum_(config.momentum),
      weight_decay_(config.weight_decay),
      velocity_(shape.zeros_like()) {
  config.validate();
}

void SgdOptimizer::step(MlpParams& params, const MlpParams& grad) {
  check_shapes(params, grad);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto update = [&](Vector& theta, const Vector& g, Vector& v, bool decay) {
      for (std::size_t k = 0; k < theta.size(); ++k) {
        const double d = g[k] + (decay ? weight_decay_ * theta[k] : 0.0);
        v[k] = momentum_ * v[k] + d;
        theta[k] -= step_size_ * v[k];
      }
    };
    update(params.layers[l].weight, grad.layers[l].weight, velocity_.layers[l].weight, true);
    update(params.layers[l].bias, grad.layers[l].bias, velocity_.layers[l].bias, false);
  }
}

ScoreEnsemble::ScoreEnsemble(std::vector<MlpParams> members)
    : members_(std::move(members)) {}

Vector ScoreEnsemble::logits(std::span<const double> x) const {
  return average_logits(refs(*this), x);
}

int ScoreEnsemble::predict(std::span<const double> x) const {
  return argmax_classify(logits(x));
}

ModelRefs refs(const ScoreEnsemble& ensemble) {
  ModelRefs out;
  for (const auto& m : ensemble.members()) out.push_back(&m);
  return out;
}

Vector average_logits(const ModelRefs& models, std::span<const double> x) {
  if (models.empty()) throw std::invalid_argument("ensemble: no members");
  Vector sum = mlp_forward(*models.front(), x);
  for (std::size_t t = 1; t < models.size(); ++t) {
    const Vector g = mlp_forward(*models[t], x);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += g[j];
  }
  for (double& v : sum) v /= static_cast<double>(models.size());
  return sum;
}

InputGradient ensemble_input_grad(const ModelRefs& models, LossKind loss,
                                  std::span<const double> x, int y, int y_prime) {
  const LossValue v = evaluate_loss(loss, average_logits(models, x), y, y_prime);
  const double scale = 1.0 / static_cast<double>(models.size());
  Vector dlogits = v.grad;
  for (double& d : dlogits) d *= scale;
  Vector grad(x.size(), 0.0);
  for (const MlpParams* m : models) {
    const Vector g = mlp_backward(*m, x, dlogits, nullptr);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
  }
  return {v.value, std::move(grad)};
}

void save_checkpoint(std::ostream& out, const MlpParams& params) {
  out << "mrboost-mlp 1\n";
  out << "layers " << params.layers.size() << "\n";
  out << "sizes";
  for (std::size_t s : params.layer_sizes()) out << ' ' << s;
  out << "\n" << std::setprecision(17);
  for (const auto& l : params.layers) {
    for (double w : l.weight) out << w << "\n";
    for (double b : l.bias) out << b << "\n";
  }
}

MlpParams load_checkpoint(std::istream& in) {
  std::string tag, word;
  int version = 0;
  std::size_t count = 0;
  if (!(in >> tag >> version) || tag != "mrboost-mlp" || version != 1) {
    throw std::runtime_error("checkpoint: bad header");
  }
  if (!(in >> word >> count) || word != "layers" || count == 0) {
    throw std::runtime_error("checkpoint: bad layer count");
  }
  if (!(in >> word) || word != "sizes") throw std::runtime_error("checkpoint: missing sizes");
  std::vector<std::size_t> sizes(count + 1);
  for (auto& s : sizes) {
    if (!(in >> s)) throw std::runtime_error("checkpoint: truncated sizes");
  }
  MlpParams p = zero_mlp(sizes);
  for (auto& l : p.layers) {
    for (double& w : l.weight) {
      if (!(in >> w)) throw std::runtime_error("checkpoint: truncated weights");
    }
    for (double& b : l.bias) {
      if (!(in >> b)) throw std::runtime_error("checkpoint: truncated biases");
    }
  }
  return p;
}

void save_checkpoint(const std::string& path, const MlpParams& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  save_checkpoint(out, params);
}

MlpParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot read " + path);
  return load_checkpoint(in);
}

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace mrb
