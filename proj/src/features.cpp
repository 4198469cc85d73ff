#include "kpicast/features.hpp"

#include <string>

namespace kpicast {

HourMeta hour_meta(HourStamp label) {
  const EpochSeconds slot_start = to_epoch(label) - kSecondsPerHour;
  std::int64_t hour_of_day = (slot_start / kSecondsPerHour) % kHoursPerDay;
  if (hour_of_day < 0) hour_of_day += kHoursPerDay;
  return HourMeta{static_cast<int>(hour_of_day) + 1, iso_weekday(slot_start)};
}

AnchorIndex anchor_index(std::int64_t t_p, const HourMeta& meta, const WindowConfig& cfg) {
  if (cfg.k < 1) throw std::invalid_argument("WindowConfig.k must be >= 1");
  const int offset = cfg.variant == AnchorVariant::weekday_offset
                         ? meta.m2 * kHoursPerDay + meta.m1
                         : (meta.m2 - 1) * kHoursPerDay + meta.m1;
  const std::int64_t e = t_p - offset;
  return AnchorIndex{e, e - static_cast<std::int64_t>(kHoursPerWeek) * cfg.k};
}

std::vector<double> filter_f1(const DenseSeries& series) {
  std::vector<double> out;
  out.reserve(series.size());
  for (const auto& s : series.samples) out.push_back(s.mean);
  return out;
}

F2Features filter_f2(const ScaledSeries& series, std::int64_t e, std::int64_t t_p,
                     const WindowConfig& cfg) {
  const auto n = static_cast<std::int64_t>(series.size());
  if (e < 0 || e >= n) {
    throw InsufficientHistory("anchor index " + std::to_string(e) + " outside series of length " +
                              std::to_string(n));
  }
  const std::int64_t oldest = t_p - static_cast<std::int64_t>(kHoursPerWeek) * cfg.k;
  if (oldest < 0) {
    throw InsufficientHistory("same-hour lookback reaches index " + std::to_string(oldest));
  }
  F2Features f;
  f.mean_e = series.means[static_cast<std::size_t>(e)];
  f.last_e = series.lasts[static_cast<std::size_t>(e)];
  f.same_hour_means.reserve(static_cast<std::size_t>(cfg.k));
  for (int i = 1; i <= cfg.k; ++i) {
    const std::int64_t tau = t_p - static_cast<std::int64_t>(kHoursPerWeek) * i;
    if (tau >= n) throw std::out_of_range("same-hour index beyond series end");
    f.same_hour_means.push_back(series.means[static_cast<std::size_t>(tau)]);
  }
  return f;
}

std::vector<double> FeatureVector::flatten() const {
  std::vector<double> x;
  x.reserve(size());
  x.push_back(mean_e);
  x.push_back(last_e);
  x.insert(x.end(), same_hour_means.begin(), same_hour_means.end());
  x.push_back(m1);
  x.push_back(m2);
  x.push_back(mean_model_output);
  return x;
}

namespace {

FeatureVector assemble(F2Features f2, const HourMeta& meta, double mean_output) {
  return FeatureVector{f2.mean_e,
                       f2.last_e,
                       std::move(f2.same_hour_means),
                       static_cast<double>(meta.m1),
                       static_cast<double>(meta.m2),
                       mean_output};
}

}  // namespace

std::vector<TrainingExample> build_training_set(const ScaledSeries& series, const WindowConfig& cfg,
                                                double mean_output) {
  std::vector<TrainingExample> out;
  const auto n = static_cast<std::int64_t>(series.size());
  for (std::int64_t t_p = 0; t_p < n; ++t_p) {
    const HourMeta meta = hour_meta(series.stamp(static_cast<std::size_t>(t_p)));
    const AnchorIndex anchor = anchor_index(t_p, meta, cfg);
    if (!anchor.usable()) continue;
    out.push_back(TrainingExample{
        assemble(filter_f2(series, anchor.e, t_p, cfg), meta, mean_output).flatten(),
        series.means[static_cast<std::size_t>(t_p)], meta, t_p});
  }
  if (out.empty()) {
    throw InsufficientHistory("series of length " + std::to_string(n) +
                              " yields no training tuple with k=" + std::to_string(cfg.k) +
                              "; at least " + std::to_string(minimum_training_length(series, cfg)) +
                              " hourly samples are required");
  }
  return out;
}

std::size_t minimum_training_length(const ScaledSeries& series, const WindowConfig& cfg) {
  // The offset cycles weekly, so the first usable index is within one week of 168k.
  for (std::int64_t t_p = 0;; ++t_p) {
    const AnchorIndex anchor = anchor_index(t_p, hour_meta(series.start + t_p), cfg);
    if (anchor.usable()) return static_cast<std::size_t>(t_p) + 1;
  }
}

std::vector<InferenceInput> build_inference_inputs(const ScaledSeries& series,
                                                   const WindowConfig& cfg, double mean_output,
                                                   int horizon) {
  if (series.size() == 0) throw InsufficientHistory("empty series");
  const auto last = static_cast<std::int64_t>(series.size()) - 1;
  std::vector<InferenceInput> out;
  out.reserve(static_cast<std::size_t>(horizon));
  for (int w = 1; w <= horizon; ++w) {
    const std::int64_t t = last + w;
    const HourMeta meta = hour_meta(series.start + t);
    AnchorIndex anchor = anchor_index(t, meta, cfg);
    const bool clamped = anchor.e > last;
    if (clamped) anchor.e = last;
    anchor.s = anchor.e - static_cast<std::int64_t>(kHoursPerWeek) * cfg.k;
    if (!anchor.usable()) {
      throw InsufficientHistory("series of length " + std::to_string(series.size()) +
                                " is too short to build inputs for horizon " + std::to_string(w));
    }
    out.push_back(InferenceInput{
        assemble(filter_f2(series, anchor.e, t, cfg), meta, mean_output).flatten(), meta, t,
        clamped});
  }
  return out;
}

}  // namespace kpicast
