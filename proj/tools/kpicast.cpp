// kpicast: per-series KPI forecasting from the command line.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kpicast/csv.hpp"
#include "kpicast/evaluation.hpp"
#include "kpicast/ingest.hpp"
#include "kpicast/preprocess.hpp"
#include "kpicast/runner.hpp"
#include "kpicast/synth.hpp"

using namespace kpicast;

namespace {

struct MappingOptions {
  std::string file;
  std::vector<std::string> columns;

  ColumnMapping build() const {
    ColumnMapping mapping = file.empty() ? ColumnMapping{} : ColumnMapping::from_json_file(file);
    for (const auto& spec : columns) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--column expects role=name, got '" + spec + "'");
      mapping.set(spec.substr(0, eq), spec.substr(eq + 1));
    }
    return mapping;
  }
};

void add_mapping_options(CLI::App* cmd, MappingOptions& opts) {
  cmd->add_option("--mapping", opts.file, "JSON file mapping column roles to header names");
  cmd->add_option("--column", opts.columns, "Column override as role=header (repeatable)");
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output '" + path + "'");
  return out;
}

void report_parse(const ParseStats& stats) {
  std::cerr << "parsed " << stats.rows << " rows: " << stats.accepted << " accepted, "
            << stats.malformed << " malformed, " << stats.duplicates << " duplicates, "
            << stats.gap_rows << " gap rows, " << stats.inconsistent << " inconsistent aggregates\n";
  for (const auto& m : stats.messages) std::cerr << "  warning: " << m << '\n';
}

struct PipelineFlags {
  int k = 2;
  double c = 0.0;
  double d = 100.0;
  int epochs = 6;
  double lr = 1e-3;
  double dropout = 0.1;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  std::string e_offset = "weekday";

  RunConfig build() const {
    RunConfig cfg;
    cfg.pipeline.window.k = k;
    cfg.pipeline.window.variant =
        e_offset == "week-start" ? AnchorVariant::week_start : AnchorVariant::weekday_offset;
    cfg.pipeline.c = c;
    cfg.pipeline.d = d;
    cfg.pipeline.train.epochs = epochs;
    cfg.pipeline.train.lr = lr;
    cfg.pipeline.train.dropout_p = dropout;
    cfg.workers = workers;
    cfg.seed = seed;
    if (k < 1) throw std::invalid_argument("--k must be >= 1");
    if (!(c < d)) throw std::invalid_argument("--c must be smaller than --d");
    return cfg;
  }
};

void add_pipeline_options(CLI::App* cmd, PipelineFlags& f) {
  cmd->add_option("--k", f.k, "Lookback weeks for same-hour features")->capture_default_str();
  cmd->add_option("--c", f.c, "Lower bound of the scaled range")->capture_default_str();
  cmd->add_option("--d", f.d, "Upper bound of the scaled range")->capture_default_str();
  cmd->add_option("--epochs", f.epochs, "Training epochs per series")->capture_default_str();
  cmd->add_option("--lr", f.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--dropout", f.dropout, "Dropout probability after the first hidden layer")
      ->capture_default_str();
  cmd->add_option("--workers", f.workers, "Parallel series workers")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Global seed")->capture_default_str();
  cmd->add_option("--e-offset", f.e_offset, "Anchor offset variant")
      ->check(CLI::IsMember({"weekday", "week-start"}))
      ->capture_default_str();
}

int cmd_ingest(const std::string& input, const std::string& output, const MappingOptions& mapping) {
  const ParsedCorpus corpus = parse_corpus_file(input, mapping.build());
  report_parse(corpus.stats);
  auto out = open_output(output);
  write_canonical_header(out);
  std::size_t written = 0;
  for (const auto& [key, records] : corpus.series) {
    if (records.empty()) {
      std::cerr << "  " << key.to_string() << ": no samples\n";
      continue;
    }
    AssembleReport rep;
    const KpiSeries series = assemble_series(key, records, &rep);
    write_series_csv(out, series);
    ++written;
    std::cerr << "  " << key.to_string() << ": " << series.size() << " hours, gap fraction "
              << series.gap_fraction();
    if (rep.snapped) std::cerr << ", " << rep.snapped << " timestamps snapped";
    std::cerr << '\n';
  }
  std::cerr << written << " series written to " << output << '\n';
  return written > 0 ? 0 : 1;
}

int cmd_forecast(const std::string& input, const std::string& output, const std::string& status,
                 const std::string& models_dir, const PipelineFlags& flags, const MappingOptions& mapping) {
  RunConfig cfg = flags.build();
  if (!models_dir.empty()) cfg.models_dir = models_dir;
  const ParsedCorpus corpus = parse_corpus_file(input, mapping.build());
  report_parse(corpus.stats);

  const auto results = run_forecasts(corpus, cfg);
  {
    auto out = open_output(output);
    write_forecast_csv(out, results);
  }
  const std::string status_path = status.empty() ? output + ".status.csv" : status;
  {
    auto out = open_output(status_path);
    write_status_csv(out, results);
  }

  std::size_t ok = 0;
  std::size_t mean_only = 0;
  for (const auto& r : results) {
    if (r.ok) {
      ++ok;
      if (r.selection && r.selection->weights == EnsembleWeights::mean_only()) ++mean_only;
    } else {
      std::cerr << "  failed " << r.key.to_string() << ": " << r.error << '\n';
    }
  }
  std::cerr << ok << "/" << results.size() << " series forecast (" << mean_only
            << " mean-only), status in " << status_path << '\n';
  return ok > 0 ? 0 : 1;
}

int cmd_score(const std::string& forecast_path, const std::string& truth_path, const std::string& output,
              const MappingOptions& mapping) {
  std::ifstream fin(forecast_path);
  if (!fin) throw std::runtime_error("cannot open forecast '" + forecast_path + "'");
  const ForecastTable forecasts = read_forecast_csv(fin);
  const ParsedCorpus truth = parse_corpus_file(truth_path, mapping.build());
  const ScoreOutcome outcome = score_forecasts(forecasts, truth);
  if (!outcome.forecast_only.empty() || !outcome.truth_only.empty()) {
    std::cerr << "warning: " << outcome.forecast_only.size() << " forecast keys without truth, "
              << outcome.truth_only.size() << " truth keys without forecast\n";
  }
  if (!output.empty()) {
    auto out = open_output(output);
    write_score_csv(out, outcome.report);
  } else {
    write_score_csv(std::cout, outcome.report);
  }
  const auto& rep = outcome.report;
  std::cout << "pooled_r2=" << (rep.pooled ? csv::format_real(*rep.pooled) : "undefined")
            << " macro_r2=" << (rep.macro_average ? csv::format_real(*rep.macro_average) : "undefined")
            << " series=" << rep.per_series.size() << " undefined=" << rep.undefined_series
            << " points=" << rep.n_points << '\n';
  return 0;
}

int cmd_profile(const std::string& input, const std::string& output, const MappingOptions& mapping) {
  const ParsedCorpus corpus = parse_corpus_file(input, mapping.build());
  report_parse(corpus.stats);
  auto out = open_output(output);
  out << "host_id,kpi_name,hour_of_week,mean,ci_low,ci_high,n\n";
  for (const auto& [key, records] : corpus.series) {
    if (records.empty()) continue;
    const DenseSeries dense = interpolate_gaps(assemble_series(key, records));
    const std::string prefix = csv::escape(key.host_id) + "," + csv::escape(key.kpi_name) + ",";
    for (const auto& row : weekly_profile(dense)) {
      out << prefix << row.hour_of_week << ',' << csv::format_real(row.mean) << ','
          << csv::format_real(row.ci_low) << ',' << csv::format_real(row.ci_high) << ',' << row.n << '\n';
    }
  }
  return 0;
}

int cmd_synth(std::size_t n, std::uint64_t seed, std::size_t length, double noise_fraction, double gap_prob,
              const std::vector<std::string>& classes, const std::string& output) {
  CorpusOptions opts;
  opts.length_hours = length;
  opts.seasonal_noise_fraction = noise_fraction;
  if (!classes.empty()) {
    opts.classes.clear();
    for (const auto& name : classes) {
      const auto c = parse_class(name);
      if (!c) throw std::invalid_argument("unknown series class '" + name + "'");
      opts.classes.push_back(*c);
    }
  }
  auto corpus = generate_corpus(n, seed, opts);
  auto out = open_output(output);
  write_canonical_header(out);
  std::size_t dropped_total = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (gap_prob > 0.0) {
      std::size_t dropped = 0;
      corpus[i] = inject_gaps(corpus[i], gap_prob, seed ^ (i + 1), &dropped);
      dropped_total += dropped;
    }
    write_series_csv(out, corpus[i]);
  }
  std::cerr << corpus.size() << " series x " << length << " hours written to " << output;
  if (gap_prob > 0.0) std::cerr << " (" << dropped_total << " hours dropped)";
  std::cerr << '\n';
  return 0;
}

int cmd_bench(std::size_t length, std::size_t repetitions, bool compare_double, const PipelineFlags& flags) {
  const RunConfig cfg = flags.build();
  auto print = [](const BenchReport& rep) {
    const auto& s = rep.summary;
    std::cout << "series_length=" << rep.series_length << " examples=" << rep.examples
              << " repetitions=" << rep.epoch_seconds.size() << '\n';
    for (std::size_t i = 0; i < rep.epoch_seconds.size(); ++i) {
      std::cout << "  epoch " << (i + 1) << ": " << csv::format_real(rep.epoch_seconds[i]) << " s\n";
    }
    std::cout << "seconds_per_epoch: mean=" << csv::format_real(s.mean) << " sd=" << csv::format_real(s.sd)
              << " ci95=[" << csv::format_real(s.ci_low) << ", " << csv::format_real(s.ci_high) << "]\n";
  };
  print(run_bench(length, repetitions, cfg));
  if (compare_double) print(run_bench(2 * length, repetitions, cfg));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kpicast: per-series KPI forecasting with a mean/network ensemble"};
  app.require_subcommand(1);

  MappingOptions mapping;
  PipelineFlags flags;

  std::string input, output, status, models_dir, truth;
  auto* ingest = app.add_subcommand("ingest", "Parse telemetry CSV and write the canonical hourly CSV");
  ingest->add_option("--input,-i", input, "Input CSV")->required();
  ingest->add_option("--output,-o", output, "Canonical CSV output")->required();
  add_mapping_options(ingest, mapping);

  auto* forecast = app.add_subcommand("forecast", "Train per-series models and forecast the next 168 hours");
  forecast->add_option("--input,-i", input, "Input CSV")->required();
  forecast->add_option("--output,-o", output, "Forecast CSV output")->required();
  forecast->add_option("--status", status, "Per-series status CSV (default: <output>.status.csv)");
  forecast->add_option("--models-dir", models_dir, "Directory for per-series model files");
  add_pipeline_options(forecast, flags);
  add_mapping_options(forecast, mapping);

  std::string forecast_path;
  auto* score = app.add_subcommand("score", "Score a forecast CSV against a truth corpus with R²");
  score->add_option("--forecast,-f", forecast_path, "Forecast CSV")->required();
  score->add_option("--truth,-t", truth, "Truth corpus CSV (starting at the first forecast hour)")->required();
  score->add_option("--output,-o", output, "Per-series score CSV (default: stdout)");
  add_mapping_options(score, mapping);

  auto* profile = app.add_subcommand("profile", "Hour-of-week profiles with 0.95 intervals");
  profile->add_option("--input,-i", input, "Input CSV")->required();
  profile->add_option("--output,-o", output, "Profile CSV output")->required();
  add_mapping_options(profile, mapping);

  std::size_t n = 25;
  std::size_t length = 2184;
  double noise_fraction = 0.05;
  double gap_prob = 0.0;
  std::vector<std::string> classes;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus in the canonical CSV format");
  synth->add_option("--n", n, "Series per class")->capture_default_str();
  synth->add_option("--length", length, "Hours per series")->capture_default_str();
  synth->add_option("--noise-fraction", noise_fraction, "Seasonal noise sd relative to amplitude")
      ->capture_default_str();
  synth->add_option("--gap-prob", gap_prob, "Probability of dropping an interior hour")->capture_default_str();
  synth->add_option("--class", classes, "Restrict to classes (seasonal, noisy_constant, trend, bursty)");
  synth->add_option("--seed", flags.seed, "Base seed")->capture_default_str();
  synth->add_option("--output,-o", output, "Output CSV")->required();

  std::size_t repetitions = 10;
  bool compare_double = false;
  std::size_t bench_length = 2184;
  auto* bench = app.add_subcommand("bench", "Time training epochs on a synthetic series");
  bench->add_option("--length", bench_length, "Series length in hours")->capture_default_str();
  bench->add_option("--repetitions", repetitions, "Timed epochs")->capture_default_str();
  bench->add_flag("--compare-double", compare_double, "Also time a series of twice the length");
  add_pipeline_options(bench, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(input, output, mapping);
    if (*forecast) return cmd_forecast(input, output, status, models_dir, flags, mapping);
    if (*score) return cmd_score(forecast_path, truth, output, mapping);
    if (*profile) return cmd_profile(input, output, mapping);
    if (*synth) return cmd_synth(n, flags.seed, length, noise_fraction, gap_prob, classes, output);
    if (*bench) return cmd_bench(bench_length, repetitions, compare_double, flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
