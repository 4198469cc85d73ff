#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "kpicast/preprocess.hpp"

using namespace kpicast;

namespace {

AggregatedSample flat(double v, long long count = 60) { return {count, v, v / 10.0, v, v, v + 1.0, v - 1.0}; }

KpiSeries series_of(std::vector<std::optional<double>> means) {
  std::vector<std::optional<AggregatedSample>> slots;
  for (const auto& m : means) {
    if (m) slots.push_back(flat(*m));
    else slots.push_back(std::nullopt);
  }
  return KpiSeries({"h", "k"}, HourStamp{438409}, std::move(slots));
}

std::vector<double> means_of(const DenseSeries& s) {
  std::vector<double> out;
  for (const auto& x : s.samples) out.push_back(x.mean);
  return out;
}

}  // namespace

TEST_CASE("interpolate_gaps examples") {
  CHECK(means_of(interpolate_gaps(series_of({1.0, std::nullopt, 3.0}))) == std::vector<double>{1, 2, 3});
  CHECK(means_of(interpolate_gaps(series_of({5.0}))) == std::vector<double>{5});
  CHECK(means_of(interpolate_gaps(series_of({0.0, std::nullopt, std::nullopt, 6.0}))) ==
        std::vector<double>{0, 2, 4, 6});
}

TEST_CASE("interpolation fills every dimension and rounds count") {
  std::vector<std::optional<AggregatedSample>> slots = {
      AggregatedSample{10, 0, 0, 0, 0, 0, 0}, std::nullopt, std::nullopt,
      AggregatedSample{11, 3, 6, 9, 12, 15, -3}};
  const auto d = interpolate_gaps(KpiSeries({"h", "k"}, HourStamp{0}, slots));
  CHECK(d.samples[1] == AggregatedSample{10, 1, 2, 3, 4, 5, -1});
  CHECK(d.samples[2] == AggregatedSample{11, 2, 4, 6, 8, 10, -2});
}

TEST_CASE("leading and trailing gaps repeat the nearest sample") {
  const auto d = interpolate_gaps(series_of({std::nullopt, std::nullopt, 4.0, std::nullopt, 8.0, std::nullopt}));
  CHECK(means_of(d) == std::vector<double>{4, 4, 4, 6, 8, 8});
  CHECK(d.samples[0] == flat(4.0));
  CHECK(d.samples[5] == flat(8.0));
}

TEST_CASE("all-gap series cannot be interpolated") {
  CHECK_THROWS_AS(interpolate_gaps(series_of({std::nullopt, std::nullopt})), std::invalid_argument);
}

TEST_CASE("property: interpolation is idempotent on gap-free input and bounded by anchors") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::optional<double>> means;
    std::vector<double> full;
    for (int i = 0; i < 60; ++i) full.push_back(u(rng));
    for (double v : full) means.push_back(v);
    const auto dense = interpolate_gaps(series_of(means));
    CHECK(means_of(dense) == full);

    for (std::size_t i = 1; i + 1 < means.size(); ++i) {
      if (rng() % 3 == 0) means[i].reset();
    }
    const auto filled = means_of(interpolate_gaps(series_of(means)));
    std::size_t prev = 0;
    for (std::size_t i = 1; i < means.size(); ++i) {
      if (!means[i]) continue;
      for (std::size_t j = prev + 1; j < i; ++j) {
        CHECK(filled[j] >= std::min(*means[prev], *means[i]));
        CHECK(filled[j] <= std::max(*means[prev], *means[i]));
        // Independent two-point line.
        const double t = static_cast<double>(j - prev) / static_cast<double>(i - prev);
        CHECK(filled[j] == doctest::Approx(*means[prev] * (1 - t) + *means[i] * t).epsilon(1e-12));
      }
      prev = i;
    }
  }
}

TEST_CASE("fit_scale") {
  const std::vector<double> v{2, 7, 12};
  const auto p = fit_scale(v, 0, 100);
  CHECK(p.lo == 2);
  CHECK(p.hi == 12);
  CHECK_FALSE(p.degenerate());
  const std::vector<double> flat5{5, 5, 5};
  CHECK(fit_scale(flat5, 0, 100).degenerate());
  CHECK(fit_scale(flat5, 0, 100).lo == 5);
  CHECK_THROWS_AS(fit_scale(std::vector<double>{}, 0, 100), std::invalid_argument);
  CHECK_THROWS_AS(fit_scale(v, 100, 100), std::invalid_argument);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  std::vector<double> many(1000);
  for (auto& x : many) x = u(rng);
  double lo = many[0], hi = many[0];
  for (double x : many) {
    if (x < lo) lo = x;
    if (x > hi) hi = x;
  }
  const auto q = fit_scale(many, 0, 100);
  CHECK(q.lo == lo);
  CHECK(q.hi == hi);
}

TEST_CASE("rescale examples") {
  const ScaleParams p{0, 100, 2, 12};
  CHECK(rescale(7, p) == 50);
  CHECK(rescale(2, p) == 0);
  CHECK(rescale(12, p) == 100);
  CHECK(rescale(17, p) == 150);
  CHECK(inverse_rescale(50, p) == 7);
  const ScaleParams flat5{0, 100, 5, 5};
  CHECK(rescale(5, flat5) == 0);
  CHECK(rescale(9, flat5) == 0);
  CHECK(inverse_rescale(0, flat5) == 5);
  CHECK(inverse_rescale(42, flat5) == 5);
}

TEST_CASE("property: rescale is strictly monotone and inverts") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  for (int trial = 0; trial < 2000; ++trial) {
    double lo = u(rng), hi = u(rng);
    if (lo > hi) std::swap(lo, hi);
    if (lo == hi) continue;
    const ScaleParams p{-5, 5, lo, hi};
    const double a = u(rng), b = u(rng);
    if (a < b) CHECK(rescale(a, p) < rescale(b, p));
    const double back = inverse_rescale(rescale(a, p), p);
    CHECK(std::fabs(back - a) <= 1e-9 * std::max({std::fabs(a), std::fabs(lo), std::fabs(hi)}));
  }
}

TEST_CASE("scale_series scales mean and last separately") {
  std::vector<std::optional<AggregatedSample>> slots = {
      AggregatedSample{60, 10, 0, 0, 1, 20, 0}, AggregatedSample{60, 20, 0, 0, 3, 20, 0},
      AggregatedSample{60, 30, 0, 0, 5, 30, 0}};
  const auto s = scale_series(interpolate_gaps(KpiSeries({"h", "k"}, HourStamp{7}, slots)), 0, 100);
  CHECK(s.means == std::vector<double>{0, 50, 100});
  CHECK(s.lasts == std::vector<double>{0, 50, 100});
  CHECK(s.mean_scale.lo == 10);
  CHECK(s.last_scale.hi == 5);
  CHECK(s.start.hours == 7);
  const auto p = s.prefix(1);
  CHECK(p.size() == 2);
  CHECK(p.mean_scale.hi == 30);
  CHECK_THROWS_AS(s.prefix(3), std::out_of_range);
}
