#include "kpicast/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "kpicast/evaluation.hpp"

namespace kpicast {

double mean_predict(const ScaledSeries& series) {
  const auto& means = filter_f1(series);
  if (means.empty()) throw std::invalid_argument("mean_predict: empty series");
  return std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
}

double combine(double o1, double o2, const EnsembleWeights& w) {
  if (w.w_mean < 0.0 || w.w_nn < 0.0 || std::fabs(w.w_mean + w.w_nn - 1.0) > 1e-12) {
    throw std::invalid_argument("ensemble weights must be non-negative and sum to 1");
  }
  if (w.w_nn == 0.0) return o1;
  if (w.w_mean == 0.0) return o2;
  return w.w_mean * o1 + w.w_nn * o2;
}

WeightSelection select_weights(const MlpModel& trained, const ScaledSeries& series,
                               const WindowConfig& window) {
  WeightSelection sel;
  const std::size_t n = series.size();
  if (n <= static_cast<std::size_t>(kHoursPerWeek)) {
    sel.warning = "no history before the hold-out week; using the mean predictor only";
    return sel;
  }

  const ScaledSeries before = series.prefix(n - kHoursPerWeek - 1);
  const std::vector<double> truth(series.means.end() - kHoursPerWeek, series.means.end());
  // The fitted mean model (all observations), as the network saw during training.
  const double o1 = mean_predict(series);

  std::vector<InferenceInput> inputs;
  try {
    inputs = build_inference_inputs(before, window, o1);
  } catch (const InsufficientHistory& e) {
    sel.warning = std::string("hold-out evaluation impossible (") + e.what() +
                  "); using the mean predictor only";
    return sel;
  }

  std::vector<double> nn_pred;
  nn_pred.reserve(inputs.size());
  for (const auto& in : inputs) nn_pred.push_back(predict(trained, in.x));
  if (!std::all_of(nn_pred.begin(), nn_pred.end(), [](double v) { return std::isfinite(v); })) {
    sel.warning = "network produced non-finite hold-out outputs; using the mean predictor only";
    return sel;
  }
  const std::vector<double> mean_pred(truth.size(), o1);

  const double truth_mean =
      std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
  double variance = 0.0;
  for (double t : truth) variance += (t - truth_mean) * (t - truth_mean);
  variance /= static_cast<double>(truth.size());

  if (variance < kHoldoutVarianceFloor) {
    auto mse = [&](const std::vector<double>& pred) {
      double acc = 0.0;
      for (std::size_t i = 0; i < truth.size(); ++i) acc += (truth[i] - pred[i]) * (truth[i] - pred[i]);
      return acc / static_cast<double>(truth.size());
    };
    sel.metric = HoldoutMetric::mse;
    sel.nn_score = mse(nn_pred);
    sel.mean_score = mse(mean_pred);
    // A flat hold-out is matched exactly by the mean; the network must strictly beat it.
    sel.weights = sel.nn_score < sel.mean_score ? EnsembleWeights::equal()
                                                : EnsembleWeights::mean_only();
    return sel;
  }

  sel.metric = HoldoutMetric::r2;
  sel.nn_score = r2(truth, nn_pred).value();
  sel.mean_score = r2(truth, mean_pred).value();
  sel.weights = sel.nn_score < sel.mean_score ? EnsembleWeights::mean_only()
                                              : EnsembleWeights::equal();
  return sel;
}

SeriesForecast forecast_series(const SeriesKey& key, const MlpModel& model,
                               const ScaledSeries& series, const WindowConfig& window,
                               const EnsembleWeights& weights) {
  const double o1 = mean_predict(series);
  const auto inputs = build_inference_inputs(series, window, o1);
  SeriesForecast out{key, {}, 0};
  out.values.reserve(inputs.size());
  for (const auto& in : inputs) {
    const double o2 = predict(model, in.x);
    double o = o1;
    if (std::isfinite(o2)) {
      o = combine(o1, o2, weights);
    } else {
      ++out.nn_fallbacks;
    }
    out.values.push_back(inverse_rescale(o, series.mean_scale));
  }
  if (!std::all_of(out.values.begin(), out.values.end(), [](double v) { return std::isfinite(v); })) {
    throw std::runtime_error("forecast for " + key.to_string() + " is not finite");
  }
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

SeriesOutcome run_series(const KpiSeries& series, const PipelineConfig& cfg) {
  std::vector<std::string> warnings;
  if (series.gap_count() > 0) {
    warnings.push_back(std::to_string(series.gap_count()) + " of " + std::to_string(series.size()) +
                       " hours interpolated");
  }
  const DenseSeries dense = interpolate_gaps(series);
  const ScaledSeries scaled = scale_series(dense, cfg.c, cfg.d);
  const double o1 = mean_predict(scaled);

  const auto examples = build_training_set(scaled, cfg.window, o1);
  std::vector<TrainSample> data;
  data.reserve(examples.size());
  for (const auto& ex : examples) data.push_back(TrainSample{ex.x, ex.target});

  MlpModel model = MlpModel::init(feature_dim(cfg.window), splitmix64(cfg.train.seed),
                                  cfg.train.dropout_p);
  TrainResult training = train(model, data, cfg.train);

  WeightSelection selection = select_weights(model, scaled, cfg.window);
  if (selection.warning) warnings.push_back(*selection.warning);

  SeriesForecast forecast = forecast_series(series.key(), model, scaled, cfg.window, selection.weights);
  if (forecast.nn_fallbacks > 0) {
    warnings.push_back(std::to_string(forecast.nn_fallbacks) +
                       " horizons fell back to the mean predictor (non-finite network output)");
  }

  return SeriesOutcome{
      FittedSeries{std::move(model), scaled.mean_scale, scaled.last_scale, cfg.window, o1,
                   selection, std::move(training)},
      std::move(forecast), std::move(warnings)};
}

}  // namespace kpicast
