#pragma once

#include <span>
#include <vector>

#include "kpicast/ingest.hpp"

namespace kpicast {

/// A gap-free series: one sample per hour starting at `start`.
struct DenseSeries {
  SeriesKey key;
  HourStamp start;
  std::vector<AggregatedSample> samples;

  std::size_t size() const { return samples.size(); }
  HourStamp stamp(std::size_t i) const { return start + static_cast<std::int64_t>(i); }
};

/// Linear gap filling on all seven aggregates. Interior gaps interpolate
/// between the nearest observed neighbours (count is rounded); leading and
/// trailing gaps repeat the nearest observed sample.
/// Throws std::invalid_argument for an all-gap series.
DenseSeries interpolate_gaps(const KpiSeries& series);

/// Affine map of [lo, hi] onto [c, d]. lo == hi is the degenerate constant map.
struct ScaleParams {
  double c = 0.0;
  double d = 100.0;
  double lo = 0.0;
  double hi = 0.0;

  bool degenerate() const { return lo == hi; }
};

ScaleParams fit_scale(std::span<const double> values, double c, double d);

/// Values outside [lo, hi] extrapolate linearly.
double rescale(double v, const ScaleParams& p);
double inverse_rescale(double u, const ScaleParams& p);

/// Mean and last dimensions of a dense series in scaled space, each with its
/// own scale. The mean scale is the one used to de-scale predictions.
struct ScaledSeries {
  HourStamp start;
  std::vector<double> means;
  std::vector<double> lasts;
  ScaleParams mean_scale;
  ScaleParams last_scale;

  std::size_t size() const { return means.size(); }
  HourStamp stamp(std::size_t i) const { return start + static_cast<std::int64_t>(i); }

  /// Inclusive prefix [0, last_index], keeping the fitted scales.
  ScaledSeries prefix(std::size_t last_index) const;
};

ScaledSeries scale_series(const DenseSeries& series, double c, double d);

}  // namespace kpicast
