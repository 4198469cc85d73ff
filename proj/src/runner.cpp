#include "kpicast/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <thread>

#include "kpicast/csv.hpp"
#include "kpicast/model_io.hpp"
#include "kpicast/synth.hpp"

namespace kpicast {

namespace {

std::uint64_t fnv1a(std::string_view text, std::uint64_t hash = 0xCBF29CE484222325ull) {
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001B3ull;
  }
  return hash;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string model_file_name(const SeriesKey& key) {
  std::string name = key.host_id + "__" + key.kpi_name;
  for (char& ch : name) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                    ch == '-' || ch == '_' || ch == '.';
    if (!ok) ch = '_';
  }
  char suffix[24];
  std::snprintf(suffix, sizeof suffix, "-%08llx.kpim",
                static_cast<unsigned long long>(series_seed(0, key) & 0xFFFFFFFFull));
  return name + suffix;
}

const char* metric_name(HoldoutMetric m) { return m == HoldoutMetric::r2 ? "r2" : "mse"; }

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

}  // namespace

std::uint64_t series_seed(std::uint64_t global_seed, const SeriesKey& key) {
  std::uint64_t h = fnv1a(key.host_id);
  h = fnv1a(std::string_view("\x1f", 1), h);
  h = fnv1a(key.kpi_name, h);
  return splitmix64(h ^ splitmix64(global_seed));
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
}

std::vector<SeriesResult> run_forecasts(const ParsedCorpus& corpus, const RunConfig& cfg) {
  std::vector<const std::pair<const SeriesKey, std::vector<Record>>*> jobs;
  jobs.reserve(corpus.series.size());
  for (const auto& entry : corpus.series) jobs.push_back(&entry);

  if (cfg.models_dir) std::filesystem::create_directories(*cfg.models_dir);

  std::vector<SeriesResult> results(jobs.size());
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
    const auto& [key, records] = *jobs[i];
    SeriesResult& r = results[i];
    r.key = key;
    try {
      AssembleReport assembled;
      const KpiSeries series = assemble_series(key, records, &assembled);
      if (assembled.snapped > 0) {
        r.warnings.push_back(std::to_string(assembled.snapped) + " timestamps snapped to the hour");
      }
      if (assembled.collisions > 0) {
        r.warnings.push_back(std::to_string(assembled.collisions) + " samples collided after snapping");
      }
      PipelineConfig pc = cfg.pipeline;
      pc.train.seed = series_seed(cfg.seed, key);
      SeriesOutcome outcome = run_series(series, pc);
      if (outcome.forecast.values.size() != static_cast<std::size_t>(kForecastHorizon)) {
        throw std::logic_error("forecast has the wrong length");
      }
      if (cfg.models_dir) {
        save_model_file((std::filesystem::path(*cfg.models_dir) / model_file_name(key)).string(),
                        bundle_of(outcome.fitted));
      }
      r.warnings.insert(r.warnings.end(), outcome.warnings.begin(), outcome.warnings.end());
      r.selection = outcome.fitted.selection;
      r.forecast = std::move(outcome.forecast);
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.forecast.reset();
      r.error = e.what();
    }
  });
  return results;
}

void write_forecast_csv(std::ostream& out, const std::vector<SeriesResult>& results) {
  out << "host_id,kpi_name,horizon_hour,predicted_mean\n";
  for (const auto& r : results) {
    if (!r.ok || !r.forecast) continue;
    const std::string prefix = csv::escape(r.key.host_id) + "," + csv::escape(r.key.kpi_name) + ",";
    for (std::size_t h = 0; h < r.forecast->values.size(); ++h) {
      out << prefix << (h + 1) << ',' << csv::format_real(r.forecast->values[h]) << '\n';
    }
  }
}

void write_status_csv(std::ostream& out, const std::vector<SeriesResult>& results) {
  out << "host_id,kpi_name,status,w_mean,w_nn,holdout_metric,nn_score,mean_score,message\n";
  for (const auto& r : results) {
    out << csv::escape(r.key.host_id) << ',' << csv::escape(r.key.kpi_name) << ','
        << (r.ok ? "ok" : "failed") << ',';
    if (r.selection) {
      out << csv::format_real(r.selection->weights.w_mean) << ','
          << csv::format_real(r.selection->weights.w_nn) << ',' << metric_name(r.selection->metric)
          << ',' << csv::format_real(r.selection->nn_score) << ','
          << csv::format_real(r.selection->mean_score) << ',';
    } else {
      out << ",,,,,";
    }
    out << csv::escape(r.ok ? join(r.warnings) : r.error) << '\n';
  }
}

ForecastTable read_forecast_csv(std::istream& in) {
  if (!in) throw IngestError("forecast stream is not readable");
  std::string line;
  if (!std::getline(in, line)) throw IngestError("forecast file is empty");
  const auto header = csv::split_line(csv::trim(line));
  if (!header || header->size() < 4 || csv::trim((*header)[0]) != "host_id" ||
      csv::trim((*header)[1]) != "kpi_name" || csv::trim((*header)[2]) != "horizon_hour" ||
      csv::trim((*header)[3]) != "predicted_mean") {
    throw IngestError("forecast header must be host_id,kpi_name,horizon_hour,predicted_mean");
  }
  ForecastTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = csv::trim(line);
    if (trimmed.empty()) continue;
    const auto fields = csv::split_line(trimmed);
    if (!fields || fields->size() < 4) throw IngestError("malformed forecast row at line " + std::to_string(line_no));
    const auto h = csv::parse_integer((*fields)[2]);
    const auto v = csv::parse_real((*fields)[3]);
    if (!h || *h < 1 || *h > kForecastHorizon || !v) {
      throw IngestError("bad horizon or value at line " + std::to_string(line_no));
    }
    auto& row = table[SeriesKey{std::string(csv::trim((*fields)[0])), std::string(csv::trim((*fields)[1]))}];
    row.resize(kForecastHorizon);
    row[static_cast<std::size_t>(*h - 1)] = *v;
  }
  return table;
}

ScoreOutcome score_forecasts(const ForecastTable& forecasts, const ParsedCorpus& truth) {
  ScoreOutcome outcome;
  std::vector<ScoredSeries> scored;
  for (const auto& [key, preds] : forecasts) {
    const auto it = truth.series.find(key);
    if (it == truth.series.end() || it->second.empty()) {
      outcome.forecast_only.push_back(key);
      continue;
    }
    const KpiSeries series = assemble_series(key, it->second);
    ScoredSeries s{key, {}, {}};
    for (std::size_t h = 0; h < preds.size() && h < series.size(); ++h) {
      if (!preds[h] || !series[h]) continue;
      s.truth.push_back(series[h]->mean);
      s.pred.push_back(*preds[h]);
    }
    scored.push_back(std::move(s));
  }
  for (const auto& [key, records] : truth.series) {
    if (!forecasts.contains(key)) outcome.truth_only.push_back(key);
  }
  if (scored.empty()) throw std::runtime_error("forecasts and truth share no series");
  outcome.report = score(scored);
  return outcome;
}

void write_score_csv(std::ostream& out, const ScoreReport& report) {
  out << "host_id,kpi_name,r2\n";
  for (const auto& s : report.per_series) {
    out << csv::escape(s.key.host_id) << ',' << csv::escape(s.key.kpi_name) << ','
        << (s.r2 ? csv::format_real(*s.r2) : std::string("undefined")) << '\n';
  }
}

BenchReport run_bench(std::size_t series_length, std::size_t repetitions, const RunConfig& cfg) {
  SynthSpec spec;
  spec.kind = SeriesClass::seasonal;
  spec.length_hours = series_length;
  spec.seed = cfg.seed;
  spec.params.daily_amplitude = 5.0;
  const KpiSeries series = generate(spec);
  const ScaledSeries scaled = scale_series(interpolate_gaps(series), cfg.pipeline.c, cfg.pipeline.d);
  const auto examples = build_training_set(scaled, cfg.pipeline.window, mean_predict(scaled));
  std::vector<TrainSample> data;
  for (const auto& ex : examples) data.push_back(TrainSample{ex.x, ex.target});

  BenchReport report;
  report.series_length = series_length;
  report.examples = data.size();
  TrainConfig one_epoch = cfg.pipeline.train;
  one_epoch.epochs = 1;
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    one_epoch.seed = splitmix64(cfg.seed + rep);
    MlpModel model = MlpModel::init(feature_dim(cfg.pipeline.window), one_epoch.seed, one_epoch.dropout_p);
    const auto t0 = std::chrono::steady_clock::now();
    train(model, data, one_epoch);
    const auto t1 = std::chrono::steady_clock::now();
    report.epoch_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  report.summary = summarize(report.epoch_seconds);
  return report;
}

}  // namespace kpicast
