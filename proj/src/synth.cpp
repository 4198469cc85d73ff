#include "kpicast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

#include "kpicast/features.hpp"
#include "kpicast/mlp.hpp"

namespace kpicast {

namespace {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t x = base ^ (salt * 0x9E3779B97F4A7C15ull);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void validate(const SynthSpec& spec) {
  const auto& p = spec.params;
  if (spec.length_hours < 1) throw std::invalid_argument("synth: length_hours must be >= 1");
  if (!(p.noise_sd >= 0.0)) throw std::invalid_argument("synth: noise_sd must be >= 0");
  if (!(p.burst_rate >= 0.0 && p.burst_rate <= 1.0)) {
    throw std::invalid_argument("synth: burst_rate must be in [0, 1]");
  }
  const double all[] = {p.baseline, p.amplitude, p.daily_amplitude, p.noise_sd,
                        p.slope,    p.burst_rate, p.burst_height};
  if (!std::all_of(std::begin(all), std::end(all), [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument("synth: parameters must be finite");
  }
  if (spec.key.host_id.empty() || spec.key.kpi_name.empty()) {
    throw std::invalid_argument("synth: series key must be non-empty");
  }
}

AggregatedSample aggregate(const std::vector<double>& draws) {
  AggregatedSample s;
  s.count = static_cast<long long>(draws.size());
  s.first = draws.front();
  s.last = draws.back();
  const auto [lo, hi] = std::minmax_element(draws.begin(), draws.end());
  s.min = *lo;
  s.max = *hi;
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double delta = draws[i] - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (draws[i] - mean);
  }
  s.mean = std::clamp(mean, s.min, s.max);
  s.std = draws.size() > 1 ? std::sqrt(std::max(0.0, m2) / static_cast<double>(draws.size() - 1)) : 0.0;
  return s;
}

}  // namespace

std::string_view class_name(SeriesClass c) {
  switch (c) {
    case SeriesClass::seasonal: return "seasonal";
    case SeriesClass::noisy_constant: return "noisy_constant";
    case SeriesClass::trend: return "trend";
    case SeriesClass::bursty: return "bursty";
  }
  return "unknown";
}

std::optional<SeriesClass> parse_class(std::string_view name) {
  for (SeriesClass c : kAllClasses) {
    if (class_name(c) == name) return c;
  }
  return std::nullopt;
}

KpiSeries generate(const SynthSpec& spec) {
  validate(spec);
  const auto& p = spec.params;
  Rng rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double two_pi = 2.0 * std::numbers::pi;

  std::vector<std::optional<AggregatedSample>> slots(spec.length_hours);
  std::vector<double> draws(kDrawsPerHour);
  for (std::size_t i = 0; i < spec.length_hours; ++i) {
    const HourStamp label = spec.start + static_cast<std::int64_t>(i);
    // Hour of week in 0..167; reduces exactly so noiseless seasonal output is 168-periodic.
    const int how = hour_meta(label).hour_of_week() - 1;

    bool burst = false;
    int burst_from = kDrawsPerHour;
    double burst_level = 0.0;
    if (spec.kind == SeriesClass::bursty && unit(rng) < p.burst_rate) {
      burst = true;
      burst_from = static_cast<int>(unit(rng) * kDrawsPerHour);
      burst_level = p.burst_height * (0.5 + unit(rng));
    }

    for (int j = 0; j < kDrawsPerHour; ++j) {
      const double frac = static_cast<double>(j) / kDrawsPerHour;
      double level = p.baseline;
      switch (spec.kind) {
        case SeriesClass::seasonal: {
          const double h = how + frac;
          level += p.amplitude * std::sin(two_pi * h / kHoursPerWeek) +
                   p.daily_amplitude * std::sin(two_pi * std::fmod(h, kHoursPerDay) / kHoursPerDay);
          break;
        }
        case SeriesClass::noisy_constant:
          break;
        case SeriesClass::trend:
          level += p.slope * (static_cast<double>(i) + frac);
          break;
        case SeriesClass::bursty:
          if (burst && j >= burst_from) level += burst_level;
          break;
      }
      const double eps = p.noise_sd > 0.0 ? p.noise_sd * noise(rng) : 0.0;
      draws[static_cast<std::size_t>(j)] = level + eps;
    }
    slots[i] = aggregate(draws);
  }
  return KpiSeries(spec.key, spec.start, std::move(slots));
}

std::vector<KpiSeries> generate_corpus(std::size_t n_per_class, std::uint64_t base_seed,
                                       const CorpusOptions& options) {
  if (n_per_class < 1) throw std::invalid_argument("generate_corpus: n must be >= 1");
  std::vector<KpiSeries> corpus;
  corpus.reserve(n_per_class * options.classes.size());
  std::size_t index = 0;
  for (SeriesClass kind : options.classes) {
    for (std::size_t i = 0; i < n_per_class; ++i, ++index) {
      const std::uint64_t seed = mix_seed(base_seed, index + 1);
      Rng draw(mix_seed(seed, 0xC0FFEE));
      auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(draw); };

      SynthSpec spec;
      spec.kind = kind;
      spec.length_hours = options.length_hours;
      spec.seed = seed;
      SynthParams& p = spec.params;
      p = SynthParams{};
      p.baseline = uniform(20.0, 400.0);
      switch (kind) {
        case SeriesClass::seasonal:
          p.amplitude = p.baseline * uniform(0.2, 0.5);
          p.daily_amplitude = p.amplitude * uniform(0.0, 0.5);
          p.noise_sd = options.seasonal_noise_fraction * p.amplitude;
          break;
        case SeriesClass::noisy_constant:
          p.amplitude = 0.0;
          p.noise_sd = p.baseline * uniform(0.02, 0.1);
          break;
        case SeriesClass::trend:
          p.amplitude = 0.0;
          p.noise_sd = p.baseline * 0.02;
          p.slope = p.baseline * uniform(-0.3, 0.6) / static_cast<double>(options.length_hours);
          break;
        case SeriesClass::bursty:
          p.baseline = uniform(0.0, 5.0);
          p.amplitude = 0.0;
          p.noise_sd = 0.2;
          p.burst_rate = uniform(0.01, 0.05);
          p.burst_height = uniform(20.0, 200.0);
          break;
      }
      char host[32];
      std::snprintf(host, sizeof host, "host-%04zu", index);
      char kpi[64];
      std::snprintf(kpi, sizeof kpi, "kpi%03zu.%s", i, std::string(class_name(kind)).c_str());
      spec.key = SeriesKey{host, kpi};
      corpus.push_back(generate(spec));
    }
  }
  return corpus;
}

std::optional<SeriesClass> class_from_kpi_name(std::string_view kpi_name) {
  const auto dot = kpi_name.rfind('.');
  if (dot == std::string_view::npos) return std::nullopt;
  return parse_class(kpi_name.substr(dot + 1));
}

KpiSeries inject_gaps(const KpiSeries& series, double p, std::uint64_t seed, std::size_t* dropped) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("inject_gaps: p must be in [0, 1]");
  auto slots = series.slots();
  Rng rng(seed);
  std::bernoulli_distribution drop(p);
  std::size_t n = 0;
  for (std::size_t i = 1; i + 1 < slots.size(); ++i) {
    if (drop(rng) && slots[i]) {
      slots[i].reset();
      ++n;
    }
  }
  if (dropped) *dropped = n;
  return KpiSeries(series.key(), series.start(), std::move(slots));
}

}  // namespace kpicast
