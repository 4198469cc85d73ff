#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace kpicast {

using Rng = std::mt19937_64;

/// Raised when a loss or gradient stops being finite during training.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully connected network with ReLU after every layer, including the scalar
/// output, and inverted dropout on the first hidden layer's activations.
///
/// Parameters live in one flat array; layer l stores its weights row-major as
/// (dims[l+1] x dims[l]) followed by its dims[l+1] biases.
class MlpModel {
 public:
  MlpModel(std::vector<std::size_t> dims, double dropout_p, std::vector<double> params);

  /// dims = [N, 4N, 2N, 1]; weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), zero biases.
  static MlpModel init(std::size_t input_dim, std::uint64_t seed, double dropout_p = 0.1);

  static std::size_t parameter_count(std::span<const std::size_t> dims);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t layer_count() const { return dims_.size() - 1; }
  double dropout() const { return dropout_p_; }
  void set_dropout(double p);

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  std::span<const double> weights(std::size_t layer) const;
  std::span<const double> bias(std::size_t layer) const;
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }

 private:
  std::vector<std::size_t> dims_;
  double dropout_p_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;
};

enum class Mode { train, infer };

/// Intermediate values kept for backpropagation.
struct ForwardCache {
  /// inputs[l] is what layer l consumed (after dropout where applied).
  std::vector<std::vector<double>> inputs;
  /// Pre-activation of every layer.
  std::vector<std::vector<double>> pre;
  /// Survivor scale per first-hidden unit: 0 or 1/(1-p); empty when no dropout ran.
  std::vector<double> dropout_scale;
};

/// Runs the network. `rng` is required in train mode when dropout is active.
double forward(const MlpModel& model, std::span<const double> x, Mode mode, Rng* rng = nullptr,
               ForwardCache* cache = nullptr);

/// Squared-error loss (y - target)^2 and its gradient with respect to every
/// parameter, written into `grad` (same layout as params()).
double loss_and_gradient(const MlpModel& model, std::span<const double> x, double target, Mode mode,
                         Rng* rng, std::span<double> grad);

inline double predict(const MlpModel& model, std::span<const double> x) {
  return forward(model, x, Mode::infer);
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over a flat parameter vector.
class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t parameter_count, AdamConfig cfg = {});

  void step(std::span<double> params, std::span<const double> grads);

  const AdamConfig& config() const { return cfg_; }
  std::int64_t steps() const { return step_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

 private:
  AdamConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::int64_t step_ = 0;
};

/// One forward/backward pass and one Adam update on a single example.
/// Throws NonFiniteError (leaving the model untouched) when the loss or
/// gradient is not finite.
double train_step(MlpModel& model, AdamOptimizer& adam, std::span<const double> x, double target,
                  Rng& rng);

struct TrainConfig {
  int epochs = 6;
  double lr = 1e-3;
  double dropout_p = 0.1;
  std::uint64_t seed = 0;
};

struct TrainSample {
  std::span<const double> x;
  double target = 0.0;
};

struct TrainResult {
  std::vector<double> epoch_mean_loss;
  std::int64_t steps = 0;
};

/// cfg.epochs passes over `data`, each in a freshly shuffled order drawn from
/// cfg.seed, one Adam step per example. Sets the model's dropout rate to
/// cfg.dropout_p; the optimizer's own learning rate is used (cfg.lr is ignored).
TrainResult train(MlpModel& model, AdamOptimizer& adam, std::span<const TrainSample> data,
                  const TrainConfig& cfg);

/// Same, with a fresh optimizer at cfg.lr.
TrainResult train(MlpModel& model, std::span<const TrainSample> data, const TrainConfig& cfg);

}  // namespace kpicast
