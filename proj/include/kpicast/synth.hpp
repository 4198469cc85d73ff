#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kpicast/ingest.hpp"

namespace kpicast {

enum class SeriesClass { seasonal, noisy_constant, trend, bursty };

inline constexpr std::array<SeriesClass, 4> kAllClasses = {
    SeriesClass::seasonal, SeriesClass::noisy_constant, SeriesClass::trend, SeriesClass::bursty};

std::string_view class_name(SeriesClass c);
std::optional<SeriesClass> parse_class(std::string_view name);

struct SynthParams {
  double baseline = 50.0;
  /// Weekly sinusoid amplitude (seasonal).
  double amplitude = 20.0;
  /// Daily sinusoid amplitude (seasonal).
  double daily_amplitude = 0.0;
  double noise_sd = 1.0;
  /// Level change per hour (trend).
  double slope = 0.0;
  /// Probability that an hour contains a burst (bursty).
  double burst_rate = 0.0;
  double burst_height = 0.0;
};

/// Label of the hour ending Monday 2020-01-06T01:00Z, i.e. a week's first slot.
inline constexpr HourStamp kSynthStart{438409};

struct SynthSpec {
  SeriesClass kind = SeriesClass::seasonal;
  std::size_t length_hours = 2184;
  std::uint64_t seed = 0;
  SynthParams params;
  SeriesKey key{"host-0000", "kpi.seasonal"};
  HourStamp start = kSynthStart;
};

inline constexpr int kDrawsPerHour = 60;

/// Hourly series whose seven aggregates summarize 60 simulated sub-hour
/// draws. Deterministic per spec. Throws std::invalid_argument for invalid
/// parameters.
KpiSeries generate(const SynthSpec& spec);

struct CorpusOptions {
  std::size_t length_hours = 2184;
  /// Seasonal noise sd as a fraction of the weekly amplitude.
  double seasonal_noise_fraction = 0.05;
  std::vector<SeriesClass> classes{kAllClasses.begin(), kAllClasses.end()};
};

/// n_per_class series per class with distinct keys and per-series levels
/// drawn from the base seed. kpi_name ends in ".<class>".
std::vector<KpiSeries> generate_corpus(std::size_t n_per_class, std::uint64_t base_seed,
                                       const CorpusOptions& options = {});

/// Recovers the generating class from a synthetic kpi_name.
std::optional<SeriesClass> class_from_kpi_name(std::string_view kpi_name);

/// Drops each interior slot with probability p (the first and last slots are
/// kept so the span is unchanged). `dropped` receives the number removed.
KpiSeries inject_gaps(const KpiSeries& series, double p, std::uint64_t seed,
                      std::size_t* dropped = nullptr);

}  // namespace kpicast
