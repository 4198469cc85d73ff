#include "kpicast/evaluation.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "kpicast/features.hpp"

namespace kpicast {

namespace {

constexpr double kZ95 = 1.96;

struct Welford {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  double sample_sd() const { return n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0; }
};

}  // namespace

void R2Accumulator::add(double truth, double pred) {
  ++n_;
  const double delta = truth - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (truth - mean_);
  const double r = truth - pred;
  sse_ += r * r;
}

void R2Accumulator::merge(const R2Accumulator& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  sse_ += other.sse_;
  n_ += other.n_;
}

std::optional<double> R2Accumulator::value() const {
  if (n_ == 0) return std::nullopt;
  if (m2_ < kR2DegenerateSst) {
    if (sse_ < kR2DegenerateSst) return 1.0;
    return std::nullopt;
  }
  return 1.0 - sse_ / m2_;
}

std::optional<double> r2(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size()) throw std::invalid_argument("r2: length mismatch");
  if (truth.empty()) throw std::invalid_argument("r2: empty input");
  R2Accumulator acc;
  for (std::size_t i = 0; i < truth.size(); ++i) acc.add(truth[i], pred[i]);
  return acc.value();
}

std::optional<double> pooled_r2(std::span<const ScoredSeries> series) {
  if (series.empty()) throw std::invalid_argument("pooled_r2: no series");
  R2Accumulator total;
  for (const auto& s : series) {
    if (s.truth.size() != s.pred.size()) {
      throw std::invalid_argument("pooled_r2: length mismatch for " + s.key.to_string());
    }
    R2Accumulator acc;
    for (std::size_t i = 0; i < s.truth.size(); ++i) acc.add(s.truth[i], s.pred[i]);
    total.merge(acc);
  }
  if (total.count() == 0) throw std::invalid_argument("pooled_r2: no points");
  return total.value();
}

ScoreReport score(std::span<const ScoredSeries> series) {
  ScoreReport report;
  if (series.empty()) return report;
  double macro_sum = 0.0;
  std::size_t macro_n = 0;
  for (const auto& s : series) {
    SeriesScore sc{s.key, std::nullopt, s.truth.size()};
    if (!s.truth.empty()) sc.r2 = r2(s.truth, s.pred);
    if (sc.r2) {
      macro_sum += *sc.r2;
      ++macro_n;
    } else {
      ++report.undefined_series;
    }
    report.n_points += s.truth.size();
    report.per_series.push_back(std::move(sc));
  }
  if (report.n_points > 0) report.pooled = pooled_r2(series);
  if (macro_n > 0) report.macro_average = macro_sum / static_cast<double>(macro_n);
  return report;
}

std::vector<ProfileRow> weekly_profile(const DenseSeries& series) {
  std::array<Welford, kHoursPerWeek> groups{};
  for (std::size_t i = 0; i < series.size(); ++i) {
    const int how = hour_meta(series.stamp(i)).hour_of_week();
    groups[static_cast<std::size_t>(how - 1)].add(series.samples[i].mean);
  }
  std::vector<ProfileRow> rows;
  rows.reserve(kHoursPerWeek);
  for (int h = 0; h < kHoursPerWeek; ++h) {
    const Welford& g = groups[static_cast<std::size_t>(h)];
    ProfileRow row{h + 1, g.mean, g.mean, g.mean, g.n};
    if (g.n > 1) {
      const double half = kZ95 * g.sample_sd() / std::sqrt(static_cast<double>(g.n));
      row.ci_low = g.mean - half;
      row.ci_high = g.mean + half;
    }
    rows.push_back(row);
  }
  return rows;
}

IntervalSummary summarize(std::span<const double> values) {
  Welford w;
  for (double v : values) w.add(v);
  IntervalSummary s{w.mean, w.sample_sd(), w.mean, w.mean, w.n};
  if (w.n > 1) {
    const double half = kZ95 * s.sd / std::sqrt(static_cast<double>(w.n));
    s.ci_low = w.mean - half;
    s.ci_high = w.mean + half;
  }
  return s;
}

}  // namespace kpicast
