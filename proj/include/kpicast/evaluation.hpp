#pragma once

#include <optional>
#include <span>
#include <vector>

#include "kpicast/ingest.hpp"
#include "kpicast/preprocess.hpp"

namespace kpicast {

/// Denominators below this make R² undefined.
inline constexpr double kR2DegenerateSst = 1e-12;

/// Streaming, mergeable sums for R²: truth mean and centred sum of squares
/// (Welford/Chan) plus the residual sum of squares.
class R2Accumulator {
 public:
  void add(double truth, double pred);
  void merge(const R2Accumulator& other);

  std::size_t count() const { return n_; }
  double sse() const { return sse_; }
  double sst() const { return m2_; }
  double truth_mean() const { return mean_; }

  /// 1 - SSE/SST; std::nullopt when SST is degenerate, except that a
  /// degenerate SST with zero residual scores 1.0.
  std::optional<double> value() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double sse_ = 0.0;
};

/// Coefficient of determination. Throws std::invalid_argument on length
/// mismatch or empty input.
std::optional<double> r2(std::span<const double> truth, std::span<const double> pred);

struct ScoredSeries {
  SeriesKey key;
  std::vector<double> truth;
  std::vector<double> pred;
};

/// R² over the concatenation of all points (grand mean in the denominator).
std::optional<double> pooled_r2(std::span<const ScoredSeries> series);

struct SeriesScore {
  SeriesKey key;
  std::optional<double> r2;
  std::size_t n = 0;
};

struct ScoreReport {
  std::vector<SeriesScore> per_series;
  std::optional<double> pooled;
  /// Mean of the defined per-series scores; undefined series are left out.
  std::optional<double> macro_average;
  std::size_t n_points = 0;
  std::size_t undefined_series = 0;
};

ScoreReport score(std::span<const ScoredSeries> series);

struct ProfileRow {
  int hour_of_week = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
};

/// Hour-of-week profile of the mean aggregate (Monday 00-01 is hour 1) with a
/// normal-approximation 0.95 interval mean +- 1.96 sd / sqrt(n). Hours never
/// observed have n = 0.
std::vector<ProfileRow> weekly_profile(const DenseSeries& series);

/// mean +- 1.96 sd / sqrt(n) with the sample standard deviation.
struct IntervalSummary {
  double mean = 0.0;
  double sd = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
};
IntervalSummary summarize(std::span<const double> values);

}  // namespace kpicast
