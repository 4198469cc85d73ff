#include "kpicast/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace kpicast {

MlpModel::MlpModel(std::vector<std::size_t> dims, double dropout_p, std::vector<double> params)
    : dims_(std::move(dims)), dropout_p_(0.0), params_(std::move(params)) {
  if (dims_.size() < 2) throw std::invalid_argument("MlpModel needs at least one layer");
  if (std::any_of(dims_.begin(), dims_.end(), [](std::size_t d) { return d == 0; })) {
    throw std::invalid_argument("MlpModel layer sizes must be positive");
  }
  if (params_.size() != parameter_count(dims_)) {
    throw std::invalid_argument("MlpModel parameter array has " + std::to_string(params_.size()) +
                                " entries, expected " + std::to_string(parameter_count(dims_)));
  }
  set_dropout(dropout_p);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    offsets_.push_back(offset);
    offset += dims_[l] * dims_[l + 1] + dims_[l + 1];
  }
}

MlpModel MlpModel::init(std::size_t input_dim, std::uint64_t seed, double dropout_p) {
  if (input_dim < 1) throw std::invalid_argument("init_mlp: input dimension must be >= 1");
  std::vector<std::size_t> dims = {input_dim, 4 * input_dim, 2 * input_dim, 1};
  std::vector<double> params(parameter_count(dims), 0.0);
  Rng rng(seed);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    const std::size_t n_weights = dims[l] * dims[l + 1];
    for (std::size_t i = 0; i < n_weights; ++i) params[offset + i] = dist(rng);
    offset += n_weights + dims[l + 1];
  }
  return MlpModel(std::move(dims), dropout_p, std::move(params));
}

std::size_t MlpModel::parameter_count(std::span<const std::size_t> dims) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += dims[l] * dims[l + 1] + dims[l + 1];
  return n;
}

void MlpModel::set_dropout(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout probability must be in [0, 1)");
  dropout_p_ = p;
}

std::span<const double> MlpModel::weights(std::size_t layer) const {
  return std::span<const double>(params_).subspan(offsets_[layer], dims_[layer] * dims_[layer + 1]);
}

std::span<const double> MlpModel::bias(std::size_t layer) const {
  return std::span<const double>(params_).subspan(offsets_[layer] + dims_[layer] * dims_[layer + 1],
                                                  dims_[layer + 1]);
}

double forward(const MlpModel& model, std::span<const double> x, Mode mode, Rng* rng,
               ForwardCache* cache) {
  if (x.size() != model.input_dim()) {
    throw std::invalid_argument("input has " + std::to_string(x.size()) + " features, model expects " +
                                std::to_string(model.input_dim()));
  }
  const bool use_dropout = mode == Mode::train && model.dropout() > 0.0;
  if (use_dropout && rng == nullptr) throw std::invalid_argument("train-mode dropout needs an RNG");

  const auto& dims = model.dims();
  const std::size_t layers = model.layer_count();
  if (cache) {
    cache->inputs.assign(layers, {});
    cache->pre.assign(layers, {});
    cache->dropout_scale.clear();
  }

  std::vector<double> input(x.begin(), x.end());
  std::vector<double> pre;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = dims[l];
    const std::size_t out = dims[l + 1];
    const auto w = model.weights(l);
    const auto b = model.bias(l);
    pre.assign(out, 0.0);
    for (std::size_t j = 0; j < out; ++j) {
      double acc = b[j];
      const double* row = w.data() + j * in;
      for (std::size_t i = 0; i < in; ++i) acc += row[i] * input[i];
      pre[j] = acc;
    }
    std::vector<double> act(out);
    for (std::size_t j = 0; j < out; ++j) act[j] = pre[j] > 0.0 ? pre[j] : 0.0;

    // Dropout sits between the first and second hidden layers.
    if (l == 0 && use_dropout && layers > 1) {
      const double keep_scale = 1.0 / (1.0 - model.dropout());
      std::bernoulli_distribution drop(model.dropout());
      std::vector<double> scale(out);
      for (std::size_t j = 0; j < out; ++j) {
        scale[j] = drop(*rng) ? 0.0 : keep_scale;
        act[j] *= scale[j];
      }
      if (cache) cache->dropout_scale = std::move(scale);
    }

    if (cache) {
      cache->inputs[l] = std::move(input);
      cache->pre[l] = pre;
    }
    input = std::move(act);
  }
  return input.front();
}

double loss_and_gradient(const MlpModel& model, std::span<const double> x, double target, Mode mode,
                         Rng* rng, std::span<double> grad) {
  if (grad.size() != model.params().size()) {
    throw std::invalid_argument("gradient buffer does not match parameter count");
  }
  ForwardCache cache;
  const double y = forward(model, x, mode, rng, &cache);
  const double residual = y - target;
  const double loss = residual * residual;

  std::fill(grad.begin(), grad.end(), 0.0);
  const auto& dims = model.dims();
  const std::size_t layers = model.layer_count();

  // delta = dL/d(pre-activation) of the current layer.
  std::vector<double> delta(1, cache.pre.back()[0] > 0.0 ? 2.0 * residual : 0.0);
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = dims[l];
    const std::size_t out = dims[l + 1];
    const auto& input = cache.inputs[l];
    double* gw = grad.data() + model.weight_offset(l);
    double* gb = gw + in * out;
    for (std::size_t j = 0; j < out; ++j) {
      if (delta[j] == 0.0) continue;
      for (std::size_t i = 0; i < in; ++i) gw[j * in + i] = delta[j] * input[i];
      gb[j] = delta[j];
    }
    if (l == 0) break;

    const auto w = model.weights(l);
    const auto& pre_prev = cache.pre[l - 1];
    std::vector<double> next(in, 0.0);
    for (std::size_t j = 0; j < out; ++j) {
      if (delta[j] == 0.0) continue;
      const double* row = w.data() + j * in;
      for (std::size_t i = 0; i < in; ++i) next[i] += row[i] * delta[j];
    }
    for (std::size_t i = 0; i < in; ++i) {
      if (pre_prev[i] <= 0.0) next[i] = 0.0;
      if (l - 1 == 0 && !cache.dropout_scale.empty()) next[i] *= cache.dropout_scale[i];
    }
    delta = std::move(next);
  }
  return loss;
}

AdamOptimizer::AdamOptimizer(std::size_t parameter_count, AdamConfig cfg)
    : cfg_(cfg), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  if (!(cfg.lr > 0.0) || !(cfg.eps > 0.0)) {
    throw std::invalid_argument("Adam learning rate and epsilon must be positive");
  }
}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw std::invalid_argument("Adam state does not match parameter count");
  }
  ++step_;
  const double correction1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
    const double m_hat = m_[i] / correction1;
    const double v_hat = v_[i] / correction2;
    params[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
  }
}

double train_step(MlpModel& model, AdamOptimizer& adam, std::span<const double> x, double target,
                  Rng& rng) {
  if (!std::isfinite(target) || !std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
    throw NonFiniteError("non-finite training input");
  }
  std::vector<double> grad(model.params().size());
  const double loss = loss_and_gradient(model, x, target, Mode::train, &rng, grad);
  const bool finite =
      std::isfinite(loss) && std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); });
  if (!finite) {
    throw NonFiniteError("non-finite loss or gradient after " + std::to_string(adam.steps()) +
                         " Adam steps (loss = " + std::to_string(loss) + ")");
  }
  adam.step(model.params(), grad);
  return loss;
}

TrainResult train(MlpModel& model, AdamOptimizer& adam, std::span<const TrainSample> data,
                  const TrainConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  model.set_dropout(cfg.dropout_p);

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t idx : order) {
      total += train_step(model, adam, data[idx].x, data[idx].target, rng);
      ++result.steps;
    }
    result.epoch_mean_loss.push_back(total / static_cast<double>(data.size()));
  }
  return result;
}

TrainResult train(MlpModel& model, std::span<const TrainSample> data, const TrainConfig& cfg) {
  AdamOptimizer adam(model.params().size(), AdamConfig{.lr = cfg.lr});
  return train(model, adam, data, cfg);
}

}  // namespace kpicast
