#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "kpicast/model_io.hpp"
#include "kpicast/runner.hpp"
#include "kpicast/synth.hpp"

using namespace kpicast;

namespace {

ParsedCorpus corpus_of(const std::vector<KpiSeries>& series, const std::string& extra = "") {
  std::ostringstream out;
  write_canonical_header(out);
  for (const auto& s : series) write_series_csv(out, s);
  out << extra;
  std::istringstream in(out.str());
  return parse_corpus(in);
}

std::vector<KpiSeries> small_corpus(std::size_t weeks = 5) {
  CorpusOptions opts;
  opts.length_hours = 168 * weeks;
  return generate_corpus(2, 9, opts);
}

RunConfig quick(std::size_t workers = 1) {
  RunConfig cfg;
  cfg.pipeline.train.epochs = 1;
  cfg.workers = workers;
  cfg.seed = 3;
  return cfg;
}

std::string forecast_text(const std::vector<SeriesResult>& results) {
  std::ostringstream out;
  write_forecast_csv(out, results);
  return out.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("kpicast_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("series seeds depend on key and global seed only") {
  const SeriesKey a{"h1", "cpu"}, b{"h1", "cpu2"}, c{"h1c", "pu"};
  CHECK(series_seed(1, a) == series_seed(1, a));
  CHECK(series_seed(1, a) != series_seed(2, a));
  CHECK(series_seed(1, a) != series_seed(1, b));
  CHECK(series_seed(1, a) != series_seed(1, c));
}

TEST_CASE("parallel_for visits each index once") {
  for (std::size_t workers : {1u, 2u, 4u, 16u}) {
    std::vector<std::atomic<int>> hits(97);
    parallel_for(hits.size(), workers, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
  parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("run_forecasts is independent of the worker count") {
  const auto corpus = corpus_of(small_corpus());
  const auto one = run_forecasts(corpus, quick(1));
  const auto four = run_forecasts(corpus, quick(4));
  REQUIRE(one.size() == 8);
  CHECK(forecast_text(one) == forecast_text(four));
  for (std::size_t i = 1; i < one.size(); ++i) CHECK(one[i - 1].key < one[i].key);
  for (const auto& r : one) {
    CHECK(r.ok);
    REQUIRE(r.forecast);
    CHECK(r.forecast->values.size() == 168);
  }
  auto other = quick(1);
  other.seed = 4;
  CHECK(forecast_text(run_forecasts(corpus, other)) != forecast_text(one));
}

TEST_CASE("per-series failures are isolated") {
  const std::string extra =
      "ghost,gap.only,2020-01-06T01:00:00Z,,,,,,,\n"
      "tiny,short,2020-01-06T01:00:00Z,60,1,0,1,1,1,1\n";
  const auto corpus = corpus_of(small_corpus(), extra);
  const auto results = run_forecasts(corpus, quick(2));
  REQUIRE(results.size() == 10);
  std::size_t failed = 0;
  for (const auto& r : results) {
    if (!r.ok) {
      ++failed;
      CHECK_FALSE(r.error.empty());
      CHECK_FALSE(r.forecast);
    }
  }
  CHECK(failed == 2);

  std::ostringstream status;
  write_status_csv(status, results);
  std::istringstream lines(status.str());
  std::string line;
  std::size_t rows = 0, failed_rows = 0;
  std::getline(lines, line);
  CHECK(line == "host_id,kpi_name,status,w_mean,w_nn,holdout_metric,nn_score,mean_score,message");
  while (std::getline(lines, line)) {
    ++rows;
    if (line.find(",failed,") != std::string::npos) ++failed_rows;
  }
  CHECK(rows == 10);
  CHECK(failed_rows == 2);

  std::istringstream fc(forecast_text(results));
  std::size_t forecast_rows = 0;
  std::getline(fc, line);
  while (std::getline(fc, line)) ++forecast_rows;
  CHECK(forecast_rows == 8 * 168);
}

TEST_CASE("forecast CSV round-trips through the reader") {
  const auto results = run_forecasts(corpus_of(small_corpus()), quick());
  std::istringstream in(forecast_text(results));
  const auto table = read_forecast_csv(in);
  REQUIRE(table.size() == results.size());
  for (const auto& r : results) {
    const auto& row = table.at(r.key);
    for (std::size_t h = 0; h < 168; ++h) CHECK(*row[h] == r.forecast->values[h]);
  }
  std::istringstream bad("a,b,c\n");
  CHECK_THROWS_AS(read_forecast_csv(bad), IngestError);
  std::istringstream bad_row("host_id,kpi_name,horizon_hour,predicted_mean\nh,k,169,1\n");
  CHECK_THROWS_AS(read_forecast_csv(bad_row), IngestError);
}

TEST_CASE("scoring forecasts against truth") {
  auto corpus = small_corpus();
  const auto truth = corpus_of(corpus);
  ForecastTable perfect;
  for (const auto& s : corpus) {
    auto& row = perfect[s.key()];
    for (std::size_t h = 0; h < 168; ++h) row.push_back(s[h]->mean);
  }
  auto outcome = score_forecasts(perfect, truth);
  CHECK(*outcome.report.pooled == 1.0);
  CHECK(outcome.report.n_points == 8 * 168);
  CHECK(outcome.forecast_only.empty());
  CHECK(outcome.truth_only.empty());

  // Per-series mean of the scored week scores zero.
  ForecastTable means;
  for (const auto& s : corpus) {
    double m = 0.0;
    for (std::size_t h = 0; h < 168; ++h) m += s[h]->mean;
    means[s.key()] = std::vector<std::optional<double>>(168, m / 168.0);
  }
  outcome = score_forecasts(means, truth);
  for (const auto& sc : outcome.report.per_series) CHECK(std::fabs(*sc.r2) < 1e-9);

  ForecastTable partial = perfect;
  partial.erase(corpus[0].key());
  partial[SeriesKey{"nobody", "x"}] = std::vector<std::optional<double>>(168, 1.0);
  outcome = score_forecasts(partial, truth);
  CHECK(outcome.report.per_series.size() == 7);
  CHECK(outcome.forecast_only.size() == 1);
  CHECK(outcome.truth_only.size() == 1);

  ForecastTable none;
  none[SeriesKey{"nobody", "x"}] = {1.0};
  CHECK_THROWS_AS(score_forecasts(none, truth), std::runtime_error);

  std::ostringstream out;
  write_score_csv(out, score_forecasts(perfect, truth).report);
  CHECK(out.str().rfind("host_id,kpi_name,r2\n", 0) == 0);
}

TEST_CASE("model files round-trip") {
  PipelineConfig cfg;
  cfg.train.epochs = 1;
  cfg.window.variant = AnchorVariant::week_start;
  const auto series = small_corpus()[0];
  const auto out = run_series(series, cfg);
  const ModelBundle bundle = bundle_of(out.fitted);

  std::stringstream buf;
  save_model(buf, bundle);
  const ModelBundle loaded = load_model(buf);
  CHECK(loaded.model.dims() == bundle.model.dims());
  CHECK(loaded.model.dropout() == bundle.model.dropout());
  CHECK(std::equal(loaded.model.params().begin(), loaded.model.params().end(), bundle.model.params().begin()));
  CHECK(loaded.mean_scale.lo == bundle.mean_scale.lo);
  CHECK(loaded.mean_scale.hi == bundle.mean_scale.hi);
  CHECK(loaded.last_scale.hi == bundle.last_scale.hi);
  CHECK(loaded.window.k == 2);
  CHECK(loaded.window.variant == AnchorVariant::week_start);
  CHECK(loaded.mean_output == bundle.mean_output);
  CHECK(loaded.weights == bundle.weights);

  // The reloaded model forecasts identically.
  const auto scaled = scale_series(interpolate_gaps(series), cfg.c, cfg.d);
  const auto again = forecast_series(series.key(), loaded.model, scaled, loaded.window, loaded.weights);
  CHECK(again.values == out.forecast.values);

  const std::string bytes = [&] {
    std::ostringstream o;
    save_model(o, bundle);
    return o.str();
  }();
  CHECK(bytes.substr(0, 8) == "KPICMDL1");
  CHECK(static_cast<unsigned char>(bytes[8]) == 1);  // version, little-endian
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(load_model(truncated), ModelFormatError);
  std::string wrong = bytes;
  wrong[0] = 'X';
  std::istringstream bad_magic(wrong);
  CHECK_THROWS_AS(load_model(bad_magic), ModelFormatError);
  wrong = bytes;
  wrong[8] = 9;
  std::istringstream bad_version(wrong);
  CHECK_THROWS_AS(load_model(bad_version), ModelFormatError);
}

TEST_CASE("run_forecasts can persist models") {
  const auto dir = scratch("models");
  auto cfg = quick();
  cfg.models_dir = dir.string();
  const auto results = run_forecasts(corpus_of(small_corpus()), cfg);
  std::set<std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files.insert(e.path().filename().string());
  CHECK(files.size() == results.size());
  for (const auto& f : files) {
    CHECK(f.ends_with(".kpim"));
    CHECK_NOTHROW(load_model_file((dir / f).string()));
  }
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(load_model_file((dir / "missing.kpim").string()), ModelFormatError);
}

TEST_CASE("bench reports timings with an interval") {
  RunConfig cfg;
  const auto report = run_bench(168 * 4, 3, cfg);
  CHECK(report.epoch_seconds.size() == 3);
  CHECK(report.examples > 0);
  double mean = 0.0;
  for (double t : report.epoch_seconds) mean += t;
  mean /= 3.0;
  double ss = 0.0;
  for (double t : report.epoch_seconds) ss += (t - mean) * (t - mean);
  const double sd = std::sqrt(ss / 2.0);
  CHECK(report.summary.mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(report.summary.sd == doctest::Approx(sd).epsilon(1e-9));
  CHECK(report.summary.ci_low == doctest::Approx(mean - 1.96 * sd / std::sqrt(3.0)).epsilon(1e-9));
  CHECK(report.summary.ci_high == doctest::Approx(mean + 1.96 * sd / std::sqrt(3.0)).epsilon(1e-9));
}
