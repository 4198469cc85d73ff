#include "kpicast/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kpicast {

namespace {

// a + (b - a) * num / den, multiplying before dividing.
double lerp(double a, double b, double num, double den) {
  const double v = a + (b - a) * num / den;
  // Keep the fill inside the anchors despite rounding.
  return std::clamp(v, std::min(a, b), std::max(a, b));
}

AggregatedSample blend(const AggregatedSample& a, const AggregatedSample& b, double num,
                       double den) {
  AggregatedSample out;
  out.count = std::llround(lerp(static_cast<double>(a.count), static_cast<double>(b.count), num, den));
  out.mean = lerp(a.mean, b.mean, num, den);
  out.std = lerp(a.std, b.std, num, den);
  out.first = lerp(a.first, b.first, num, den);
  out.last = lerp(a.last, b.last, num, den);
  out.max = lerp(a.max, b.max, num, den);
  out.min = lerp(a.min, b.min, num, den);
  return out;
}

}  // namespace

DenseSeries interpolate_gaps(const KpiSeries& series) {
  const auto& slots = series.slots();
  const std::size_t n = slots.size();

  std::vector<std::size_t> observed;
  for (std::size_t i = 0; i < n; ++i) {
    if (slots[i]) observed.push_back(i);
  }
  if (observed.empty()) {
    throw std::invalid_argument("series " + series.key().to_string() +
                                " has no observed samples to interpolate from");
  }

  DenseSeries out{series.key(), series.start(), std::vector<AggregatedSample>(n)};
  for (std::size_t i = 0; i < observed.front(); ++i) out.samples[i] = *slots[observed.front()];
  for (std::size_t i = observed.back(); i < n; ++i) out.samples[i] = *slots[observed.back()];

  for (std::size_t j = 0; j + 1 < observed.size(); ++j) {
    const std::size_t a = observed[j];
    const std::size_t b = observed[j + 1];
    out.samples[a] = *slots[a];
    const double span = static_cast<double>(b - a);
    for (std::size_t i = a + 1; i < b; ++i) {
      out.samples[i] = blend(*slots[a], *slots[b], static_cast<double>(i - a), span);
    }
  }
  return out;
}

ScaleParams fit_scale(std::span<const double> values, double c, double d) {
  if (values.empty()) throw std::invalid_argument("fit_scale: empty input");
  if (!(c < d)) throw std::invalid_argument("fit_scale: target range requires c < d");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return ScaleParams{c, d, *lo, *hi};
}

double rescale(double v, const ScaleParams& p) {
  if (p.degenerate()) return p.c;
  return p.c + (v - p.lo) * (p.d - p.c) / (p.hi - p.lo);
}

double inverse_rescale(double u, const ScaleParams& p) {
  if (p.degenerate()) return p.lo;
  return p.lo + (u - p.c) * (p.hi - p.lo) / (p.d - p.c);
}

ScaledSeries ScaledSeries::prefix(std::size_t last_index) const {
  if (last_index >= means.size()) throw std::out_of_range("ScaledSeries::prefix beyond end");
  ScaledSeries out = *this;
  out.means.resize(last_index + 1);
  out.lasts.resize(last_index + 1);
  return out;
}

ScaledSeries scale_series(const DenseSeries& series, double c, double d) {
  std::vector<double> means(series.size());
  std::vector<double> lasts(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    means[i] = series.samples[i].mean;
    lasts[i] = series.samples[i].last;
  }
  ScaledSeries out{series.start, {}, {}, fit_scale(means, c, d), fit_scale(lasts, c, d)};
  for (auto& v : means) v = rescale(v, out.mean_scale);
  for (auto& v : lasts) v = rescale(v, out.last_scale);
  out.means = std::move(means);
  out.lasts = std::move(lasts);
  return out;
}

}  // namespace kpicast
