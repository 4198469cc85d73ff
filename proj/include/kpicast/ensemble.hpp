#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kpicast/features.hpp"
#include "kpicast/mlp.hpp"
#include "kpicast/preprocess.hpp"

namespace kpicast {

/// Convex weights for (mean predictor, network).
struct EnsembleWeights {
  double w_mean = 1.0;
  double w_nn = 0.0;

  static constexpr EnsembleWeights mean_only() { return {1.0, 0.0}; }
  static constexpr EnsembleWeights equal() { return {0.5, 0.5}; }

  friend bool operator==(const EnsembleWeights&, const EnsembleWeights&) = default;
};

/// Mean of all scaled hourly means; the same value for every horizon.
double mean_predict(const ScaledSeries& series);

/// w_mean * o1 + w_nn * o2. Throws std::invalid_argument unless the weights
/// are non-negative and sum to 1 within 1e-12.
double combine(double o1, double o2, const EnsembleWeights& w);

enum class HoldoutMetric { r2, mse };

/// Hold-out targets with a mean-square deviation below this are compared by MSE.
inline constexpr double kHoldoutVarianceFloor = 1e-9;

struct WeightSelection {
  EnsembleWeights weights = EnsembleWeights::mean_only();
  HoldoutMetric metric = HoldoutMetric::r2;
  /// R² (higher is better) or MSE (lower is better), per `metric`.
  double nn_score = 0.0;
  double mean_score = 0.0;
  std::optional<std::string> warning;
};

/// Scores the trained network and the mean predictor on the final observed
/// week, using inputs built from the data before it. The network is kept
/// only if it does not score worse than the mean predictor.
WeightSelection select_weights(const MlpModel& trained, const ScaledSeries& series,
                               const WindowConfig& window);

struct SeriesForecast {
  SeriesKey key;
  /// kForecastHorizon de-scaled means for hours T+1 ... T+168.
  std::vector<double> values;
  /// Horizons where the network output was not finite and the mean was used.
  std::size_t nn_fallbacks = 0;
};

SeriesForecast forecast_series(const SeriesKey& key, const MlpModel& model,
                               const ScaledSeries& series, const WindowConfig& window,
                               const EnsembleWeights& weights);

struct PipelineConfig {
  WindowConfig window;
  double c = 0.0;
  double d = 100.0;
  TrainConfig train;
};

/// Everything learned for one series; enough to forecast again later.
struct FittedSeries {
  MlpModel model;
  ScaleParams mean_scale;
  ScaleParams last_scale;
  WindowConfig window;
  double mean_output = 0.0;
  WeightSelection selection;
  TrainResult training;
};

struct SeriesOutcome {
  FittedSeries fitted;
  SeriesForecast forecast;
  std::vector<std::string> warnings;
};

/// interpolate -> scale -> train -> select weights -> forecast.
SeriesOutcome run_series(const KpiSeries& series, const PipelineConfig& cfg);

}  // namespace kpicast
