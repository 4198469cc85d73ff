#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kpicast/ensemble.hpp"
#include "kpicast/evaluation.hpp"
#include "kpicast/ingest.hpp"

namespace kpicast {

struct RunConfig {
  PipelineConfig pipeline;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  /// When set, one model file per successful series is written here.
  std::optional<std::string> models_dir;
};

/// Stable across platforms and runs: FNV-1a of the key mixed with the seed.
std::uint64_t series_seed(std::uint64_t global_seed, const SeriesKey& key);

/// Runs fn(i) for every i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

struct SeriesResult {
  SeriesKey key;
  bool ok = false;
  std::optional<SeriesForecast> forecast;
  std::optional<WeightSelection> selection;
  std::vector<std::string> warnings;
  std::string error;
};

/// Forecasts every series of the corpus independently. Results come back in
/// ascending key order and do not depend on the worker count.
std::vector<SeriesResult> run_forecasts(const ParsedCorpus& corpus, const RunConfig& cfg);

/// `host_id,kpi_name,horizon_hour,predicted_mean`, key then horizon ascending.
void write_forecast_csv(std::ostream& out, const std::vector<SeriesResult>& results);
void write_status_csv(std::ostream& out, const std::vector<SeriesResult>& results);

using ForecastTable = std::map<SeriesKey, std::vector<std::optional<double>>>;

ForecastTable read_forecast_csv(std::istream& in);

struct ScoreOutcome {
  ScoreReport report;
  std::vector<SeriesKey> forecast_only;
  std::vector<SeriesKey> truth_only;
};

/// Aligns horizon h with the h-th hour of each truth series (counted from its
/// first timestamp) and scores the intersection. Throws std::runtime_error
/// when no key is shared.
ScoreOutcome score_forecasts(const ForecastTable& forecasts, const ParsedCorpus& truth);

void write_score_csv(std::ostream& out, const ScoreReport& report);

struct BenchReport {
  std::size_t series_length = 0;
  std::size_t examples = 0;
  std::vector<double> epoch_seconds;
  IntervalSummary summary;
};

/// Times single training epochs of a fresh network on a synthetic seasonal
/// series of the given length.
BenchReport run_bench(std::size_t series_length, std::size_t repetitions, const RunConfig& cfg);

}  // namespace kpicast
