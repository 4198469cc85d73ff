#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "kpicast/ensemble.hpp"
#include "kpicast/synth.hpp"

using namespace kpicast;

namespace {

ScaledSeries scaled(std::vector<double> means) {
  auto lasts = means;
  return ScaledSeries{kSynthStart, std::move(means), std::move(lasts), {}, {}};
}

KpiSeries seasonal(std::uint64_t seed, std::size_t weeks = 10, double noise = 1.0) {
  SynthSpec spec;
  spec.kind = SeriesClass::seasonal;
  spec.length_hours = 168 * weeks;
  spec.seed = seed;
  spec.params = SynthParams{100, 40, 10, noise, 0, 0, 0};
  return generate(spec);
}

KpiSeries constant_series(double v, std::size_t n) {
  std::vector<std::optional<AggregatedSample>> slots(n, AggregatedSample{60, v, 0, v, v, v, v});
  return KpiSeries({"h", "flat"}, kSynthStart, std::move(slots));
}

}  // namespace

TEST_CASE("mean_predict") {
  CHECK(mean_predict(scaled({1, 2, 3})) == 2.0);
  CHECK(mean_predict(scaled({7, 7, 7, 7})) == 7.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 100);
  std::vector<double> v(1000);
  for (auto& x : v) x = u(rng);
  double sum = 0.0;
  for (double x : v) sum += x;
  CHECK(std::fabs(mean_predict(scaled(v)) - sum / 1000.0) < 1e-12);
  CHECK_THROWS_AS(mean_predict(scaled({})), std::invalid_argument);
}

TEST_CASE("combine") {
  CHECK(combine(10, 20, EnsembleWeights::equal()) == 15);
  CHECK(combine(10, 20, EnsembleWeights::mean_only()) == 10);
  CHECK(combine(10, 20, EnsembleWeights{0.0, 1.0}) == 20);
  CHECK_THROWS_AS(combine(1, 2, EnsembleWeights{0.5, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(combine(1, 2, EnsembleWeights{1.5, -0.5}), std::invalid_argument);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-100, 100);
  std::uniform_real_distribution<double> w(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng), wm = w(rng);
    const EnsembleWeights ew{wm, 1.0 - wm};
    const double o = combine(a, b, ew);
    CHECK(o >= std::min(a, b) - 1e-12);
    CHECK(o <= std::max(a, b) + 1e-12);
    CHECK(combine(a, a, ew) == doctest::Approx(a).epsilon(1e-15));
  }
}

TEST_CASE("constant series select the mean and forecast the constant") {
  PipelineConfig cfg;
  cfg.train.seed = 5;
  const auto out = run_series(constant_series(42.5, 168 * 6), cfg);
  CHECK(out.fitted.selection.weights == EnsembleWeights::mean_only());
  CHECK(out.fitted.selection.metric == HoldoutMetric::mse);
  REQUIRE(out.forecast.values.size() == 168);
  for (double v : out.forecast.values) CHECK(v == 42.5);
}

TEST_CASE("seasonal series keep the network") {
  PipelineConfig cfg;
  cfg.train.seed = 11;
  const auto out = run_series(seasonal(3), cfg);
  CHECK(out.fitted.selection.weights == EnsembleWeights::equal());
  CHECK(out.fitted.selection.metric == HoldoutMetric::r2);
  CHECK(out.fitted.selection.nn_score >= out.fitted.selection.mean_score);
  CHECK(out.fitted.training.steps > 0);
  CHECK(out.fitted.training.epoch_mean_loss.size() == 6);
}

TEST_CASE("selection only emits the sanctioned pairs") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    SynthSpec spec;
    spec.kind = seed % 2 ? SeriesClass::noisy_constant : SeriesClass::trend;
    spec.length_hours = 168 * 6;
    spec.seed = seed;
    spec.params = SynthParams{80, 0, 0, 4, 0.01, 0, 0};
    PipelineConfig cfg;
    cfg.train.seed = seed;
    cfg.train.epochs = 2;
    const auto w = run_series(generate(spec), cfg).fitted.selection.weights;
    CHECK((w == EnsembleWeights::equal() || w == EnsembleWeights::mean_only()));
  }
}

TEST_CASE("select_weights rule") {
  // Network that always outputs its output bias b.
  auto constant_net = [](double b) {
    std::vector<std::size_t> dims{7, 28, 14, 1};
    std::vector<double> p(MlpModel::parameter_count(dims), 0.0);
    p.back() = b;
    return MlpModel(dims, 0.0, p);
  };
  const WindowConfig window;
  std::vector<double> means(168 * 5);
  for (std::size_t i = 0; i < means.size(); ++i) means[i] = i < 168 * 4 ? 0.0 : 100.0 * static_cast<double>(i % 2);
  const auto s = scaled(means);
  const double mean = mean_predict(s);

  // The hold-out has spread, so R² decides against the full-series mean (10).
  const auto near = select_weights(constant_net(50.0), s, window);
  CHECK(near.metric == HoldoutMetric::r2);
  CHECK(near.nn_score > near.mean_score);
  CHECK(near.weights == EnsembleWeights::equal());
  const auto far = select_weights(constant_net(mean - 5.0), s, window);
  CHECK(far.nn_score < far.mean_score);
  CHECK(far.weights == EnsembleWeights::mean_only());
  const auto tie = select_weights(constant_net(mean), s, window);
  CHECK(tie.nn_score == tie.mean_score);
  CHECK(tie.weights == EnsembleWeights::equal());

  // Flat hold-out: MSE decides and the network must be strictly better.
  std::vector<double> flat_tail(168 * 5, 10.0);
  for (std::size_t i = 0; i < 168 * 4; ++i) flat_tail[i] = static_cast<double>(i % 30);
  const auto f = scaled(flat_tail);
  const auto exact = select_weights(constant_net(10.0), f, window);
  CHECK(exact.metric == HoldoutMetric::mse);
  CHECK(exact.nn_score == 0.0);
  CHECK(exact.weights == EnsembleWeights::equal());
  const auto worse = select_weights(constant_net(60.0), f, window);
  CHECK(worse.weights == EnsembleWeights::mean_only());
}

TEST_CASE("insufficient history falls back to the mean with a warning") {
  std::vector<std::size_t> dims{7, 28, 14, 1};
  const MlpModel net(dims, 0.0, std::vector<double>(MlpModel::parameter_count(dims), 0.0));
  const auto short_sel = select_weights(net, scaled(std::vector<double>(168, 1.0)), {});
  CHECK(short_sel.weights == EnsembleWeights::mean_only());
  CHECK(short_sel.warning);
  const auto thin = select_weights(net, scaled(std::vector<double>(168 + 300, 1.0)), {});
  CHECK(thin.weights == EnsembleWeights::mean_only());
  CHECK(thin.warning);
}

TEST_CASE("mean-only forecasts collapse to the de-scaled mean") {
  PipelineConfig cfg;
  cfg.train.seed = 1;
  cfg.train.epochs = 1;
  const auto series = seasonal(4, 6);
  const auto out = run_series(series, cfg);
  const auto dense = interpolate_gaps(series);
  const auto s = scale_series(dense, cfg.c, cfg.d);
  const auto f = forecast_series(series.key(), out.fitted.model, s, cfg.window, EnsembleWeights::mean_only());
  REQUIRE(f.values.size() == 168);
  for (double v : f.values) CHECK(v == inverse_rescale(mean_predict(s), s.mean_scale));
  double native = 0.0;
  for (const auto& x : dense.samples) native += x.mean;
  native /= static_cast<double>(dense.size());
  CHECK(f.values[0] == doctest::Approx(native).epsilon(1e-12));

  // Invariant under the (c, d) configuration.
  for (auto [c, d] : {std::pair{-1.0, 1.0}, std::pair{5.0, 6.0}, std::pair{0.0, 1000.0}}) {
    const auto s2 = scale_series(dense, c, d);
    const auto f2 = forecast_series(series.key(), out.fitted.model, s2, cfg.window, EnsembleWeights::mean_only());
    for (std::size_t h = 0; h < 168; ++h) CHECK(f2.values[h] == doctest::Approx(f.values[h]).epsilon(1e-12));
  }
}

TEST_CASE("equal-weight forecasts average the two predictors") {
  PipelineConfig cfg;
  cfg.train.seed = 2;
  cfg.train.epochs = 1;
  const auto series = seasonal(5, 6);
  const auto out = run_series(series, cfg);
  const auto s = scale_series(interpolate_gaps(series), cfg.c, cfg.d);
  const auto f = forecast_series(series.key(), out.fitted.model, s, cfg.window, EnsembleWeights::equal());
  const auto inputs = build_inference_inputs(s, cfg.window, mean_predict(s));
  for (std::size_t h = 0; h < 168; ++h) {
    const double o = 0.5 * mean_predict(s) + 0.5 * predict(out.fitted.model, inputs[h].x);
    CHECK(f.values[h] == doctest::Approx(inverse_rescale(o, s.mean_scale)).epsilon(1e-12));
  }
  CHECK(f.nn_fallbacks == 0);
}

TEST_CASE("run_series reports gaps and needs history") {
  PipelineConfig cfg;
  cfg.train.epochs = 1;
  std::size_t dropped = 0;
  const auto gappy = inject_gaps(seasonal(6, 6), 0.1, 9, &dropped);
  REQUIRE(dropped > 0);
  const auto out = run_series(gappy, cfg);
  CHECK(out.forecast.values.size() == 168);
  CHECK_FALSE(out.warnings.empty());
  CHECK_THROWS_AS(run_series(seasonal(6, 2), cfg), InsufficientHistory);
}
