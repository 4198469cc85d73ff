#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "kpicast/preprocess.hpp"
#include "kpicast/time.hpp"

namespace kpicast {

/// Calendar position of an hour slot: m1 = hour of day in 1..24, m2 = day of
/// week in 1..7 with Monday = 1.
struct HourMeta {
  int m1 = 1;
  int m2 = 1;

  friend bool operator==(const HourMeta&, const HourMeta&) = default;

  /// 1..168, Monday 00:00-01:00 is 1.
  int hour_of_week() const { return (m2 - 1) * kHoursPerDay + m1; }
};

/// Meta of the hour ending at `label` (labels mark the end of their hour).
HourMeta hour_meta(HourStamp label);

/// How the anchor offset is derived from the target's calendar position.
enum class AnchorVariant {
  /// e = t_p - (m2 * 24 + m1)
  weekday_offset,
  /// e = t_p - ((m2 - 1) * 24 + m1): the last hour before the target's week.
  week_start,
};

struct WindowConfig {
  int k = 2;
  AnchorVariant variant = AnchorVariant::weekday_offset;
};

/// Thrown when a window reaches before the start of the series.
class InsufficientHistory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AnchorIndex {
  std::int64_t e = 0;
  std::int64_t s = 0;

  bool usable() const { return s >= 0; }
};

AnchorIndex anchor_index(std::int64_t t_p, const HourMeta& meta, const WindowConfig& cfg);

/// Mean dimension of every slot, in order.
std::vector<double> filter_f1(const DenseSeries& series);
inline const std::vector<double>& filter_f1(const ScaledSeries& series) { return series.means; }

struct F2Features {
  double mean_e = 0.0;
  double last_e = 0.0;
  /// Means at t_p - 168 * i for i = 1..k, most recent week first.
  std::vector<double> same_hour_means;
};

F2Features filter_f2(const ScaledSeries& series, std::int64_t e, std::int64_t t_p,
                     const WindowConfig& cfg);

/// Network input. Flattened order: mean_e, last_e, same_hour_means..., m1, m2,
/// mean_model_output. Length k + 5.
struct FeatureVector {
  double mean_e = 0.0;
  double last_e = 0.0;
  std::vector<double> same_hour_means;
  double m1 = 0.0;
  double m2 = 0.0;
  double mean_model_output = 0.0;

  std::vector<double> flatten() const;
  std::size_t size() const { return same_hour_means.size() + 5; }
};

inline std::size_t feature_dim(const WindowConfig& cfg) { return static_cast<std::size_t>(cfg.k) + 5; }

struct TrainingExample {
  std::vector<double> x;
  double target = 0.0;
  HourMeta meta;
  std::int64_t t_p = 0;
};

/// One example for every target index whose window fits (s >= 0), in
/// ascending t_p. Throws InsufficientHistory when no index qualifies.
std::vector<TrainingExample> build_training_set(const ScaledSeries& series, const WindowConfig& cfg,
                                                double mean_output);

/// Smallest series length for which build_training_set yields anything.
std::size_t minimum_training_length(const ScaledSeries& series, const WindowConfig& cfg);

struct InferenceInput {
  std::vector<double> x;
  HourMeta meta;
  /// Index of the target relative to the series start, i.e. T + w.
  std::int64_t t = 0;
  /// Set when the anchor fell after the last observation and was clamped to T.
  bool anchor_clamped = false;
};

inline constexpr int kForecastHorizon = kHoursPerWeek;

/// Inputs for the `horizon` hours following the last observation.
std::vector<InferenceInput> build_inference_inputs(const ScaledSeries& series,
                                                   const WindowConfig& cfg, double mean_output,
                                                   int horizon = kForecastHorizon);

}  // namespace kpicast
