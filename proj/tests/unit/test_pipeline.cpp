#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "sqf/core/calendar.hpp"
#include "sqf/core/error.hpp"
#include "sqf/pipeline/features.hpp"
#include "sqf/pipeline/interpolate.hpp"
#include "sqf/pipeline/perturb.hpp"
#include "sqf/pipeline/sample_cache.hpp"
#include "sqf/pipeline/samples.hpp"
#include "sqf/pipeline/scaler.hpp"
#include "sqf/pipeline/schema.hpp"
#include "sqf/pipeline/windows.hpp"
#include "test_support.hpp"

using namespace sqf;
using namespace sqf::pipeline;

namespace {

ObservationPoint point(EpochDay day, std::optional<double> v) {
	ObservationPoint p;
	p.timestamp = TimeStamp{day};
	p.value = v;
	p.observed = v.has_value();
	return p;
}

ObservationSeries series_of(std::vector<ObservationPoint> pts) {
	ObservationSeries s;
	s.cube_id = "s";
	s.points = std::move(pts);
	return s;
}

DailyWeather constant_weather(EpochDay start, std::size_t days, double rain, double temp) {
	DailyWeather w;
	w.cube_id = "w";
	w.start = TimeStamp{start};
	for (std::size_t i = 0; i < days; ++i) {
		WeatherRow r;
		r.values = {2.0, 60.0, 200.0, rain, 1010.0, temp};
		w.rows.push_back(r);
	}
	return w;
}

PerturbationConfig no_perturbation() {
	PerturbationConfig p;
	p.enabled = false;
	return p;
}

} // namespace

TEST_CASE("interpolation examples") {
	CHECK(interpolate_value(0, 0.2, 10, 0.4, 5) == doctest::Approx(0.3).epsilon(1e-15));
	const auto out = interpolate_gaps(series_of({point(0, 0.1), point(1, std::nullopt), point(4, 0.5)}));
	REQUIRE(out.points[1].hasValue());
	CHECK(*out.points[1].value == doctest::Approx(0.2).epsilon(1e-15));
	CHECK(out.points[1].interpolated);
	CHECK_FALSE(out.points[1].observed);

	const auto clear = series_of({point(0, 0.1), point(5, 0.2), point(10, 0.3)});
	CHECK(interpolate_gaps(clear) == clear);
}

TEST_CASE("interpolation leaves boundary gaps and observed points alone") {
	const auto in = series_of({point(0, std::nullopt), point(5, 0.3), point(10, std::nullopt), point(15, 0.6),
	                           point(20, std::nullopt)});
	const auto out = interpolate_gaps(in);
	REQUIRE(out.size() == in.size());
	CHECK_FALSE(out.points[0].hasValue());
	CHECK_FALSE(out.points[4].hasValue());
	CHECK(out.points[1] == in.points[1]);
	CHECK(out.points[3] == in.points[3]);
	CHECK(*out.points[2].value == doctest::Approx(0.45).epsilon(1e-15));
}

TEST_CASE("interpolation needs two observations") {
	CHECK_THROWS_AS(interpolate_gaps(series_of({point(0, 0.3), point(5, std::nullopt)})), InsufficientDataError);
}

TEST_CASE("interpolated values lie between their neighbours") {
	testing::Rng rng(3);
	std::uniform_real_distribution<double> unit(0.0, 1.0);
	for (int trial = 0; trial < 200; ++trial) {
		std::vector<ObservationPoint> pts;
		EpochDay day = 0;
		for (int i = 0; i < 20; ++i) {
			day += 1 + static_cast<EpochDay>(rng() % 9);
			pts.push_back(point(day, unit(rng) < 0.4 ? std::nullopt : std::optional<double>(unit(rng))));
		}
		pts[3] = point(pts[3].timestamp.day, 0.5);
		pts[15] = point(pts[15].timestamp.day, 0.5);
		const auto in = series_of(pts);
		const auto out = interpolate_gaps(in);
		std::optional<std::size_t> prev;
		for (std::size_t i = 0; i < in.size(); ++i) {
			if (in.points[i].observed) {
				CHECK(out.points[i] == in.points[i]);
				prev = i;
				continue;
			}
			std::optional<std::size_t> next;
			for (std::size_t j = i + 1; j < in.size(); ++j) {
				if (in.points[j].observed) {
					next = j;
					break;
				}
			}
			if (!prev || !next) {
				CHECK_FALSE(out.points[i].hasValue());
				continue;
			}
			const double lo = std::min(*in.points[*prev].value, *in.points[*next].value);
			const double hi = std::max(*in.points[*prev].value, *in.points[*next].value);
			REQUIRE(out.points[i].hasValue());
			CHECK(*out.points[i].value >= lo - 1e-15);
			CHECK(*out.points[i].value <= hi + 1e-15);
		}
	}
}

TEST_CASE("window enumeration") {
	std::vector<ObservationPoint> pts;
	for (int i = 0; i < 12; ++i) {
		pts.push_back(point(5 * i, 0.5));
	}
	const auto w = generate_windows(series_of(pts), 3, 3, 4);
	REQUIRE(w.size() == 2);
	CHECK(w[0].start == 0);
	CHECK(w[1].start == 4);
	pts.resize(6);
	CHECK(generate_windows(series_of(pts), 3, 3, 4).size() == 1);
	pts.resize(5);
	CHECK(generate_windows(series_of(pts), 3, 3, 4).empty());
	CHECK(expected_window_count(5, 3, 3, 4) == 0);
	CHECK(expected_window_count(6, 3, 3, 4) == 1);
	CHECK(expected_window_count(12, 3, 3, 4) == 2);
}

TEST_CASE("window count matches the closed form on complete series") {
	for (std::size_t n = 0; n < 40; ++n) {
		std::vector<ObservationPoint> pts;
		for (std::size_t i = 0; i < n; ++i) {
			pts.push_back(point(static_cast<EpochDay>(5 * i), 0.5));
		}
		for (std::size_t shift = 1; shift <= 5; ++shift) {
			const auto w = generate_windows(series_of(pts), 3, 2, shift);
			CHECK(w.size() == expected_window_count(n, 3, 2, shift));
			for (std::size_t i = 0; i < w.size(); ++i) {
				CHECK(w[i].start == i * shift);
				CHECK(w[i].end() <= n);
			}
		}
	}
}

TEST_CASE("windows skip unrecoverable points") {
	std::vector<ObservationPoint> pts;
	for (int i = 0; i < 8; ++i) {
		pts.push_back(point(5 * i, 0.5));
	}
	pts[0].value.reset();
	pts[0].observed = false;
	const auto strict = generate_windows(series_of(pts), 3, 3, 1);
	REQUIRE(strict.size() == 2);
	CHECK(strict[0].start == 1);
	const auto masked = generate_windows(series_of(pts), 3, 3, 1, true);
	CHECK(masked.size() == 3);
}

TEST_CASE("cyclical encoding examples") {
	const auto one = cyclical_encoding(1);
	const std::array<double, 6> first = {0, 1, 0, 1, 0, 1};
	for (std::size_t i = 0; i < 6; ++i) {
		CHECK(one[i] == doctest::Approx(first[i]).epsilon(1e-15));
	}
	const auto mid = cyclical_encoding(184);
	const std::array<double, 6> half = {0, -1, 0, 1, 0, -1};
	for (std::size_t i = 0; i < 6; ++i) {
		CHECK(std::abs(mid[i] - half[i]) < 1e-14);
	}
	CHECK_THROWS(cyclical_encoding(0));
	CHECK_THROWS(cyclical_encoding(367));
}

TEST_CASE("cyclical encoding matches a long double oracle") {
	const long double pi = 3.141592653589793238462643383279502884L;
	for (int d = 1; d <= 366; ++d) {
		const auto enc = cyclical_encoding(d);
		for (int s = 1; s <= 3; ++s) {
			const long double phase = 2.0L * pi * s * (d - 1) / 366.0L;
			CHECK(std::abs(enc[2 * (s - 1)] - static_cast<double>(std::sin(phase))) < 1e-14);
			CHECK(std::abs(enc[2 * (s - 1) + 1] - static_cast<double>(std::cos(phase))) < 1e-14);
		}
	}
}

TEST_CASE("between-target features") {
	auto w = constant_weather(100, 10, 0.0, 20.0);
	const double rain[] = {1, 2, 0};
	const double temp[] = {5, 12, 31};
	for (int i = 0; i < 3; ++i) {
		w.rows[static_cast<std::size_t>(3 + i)].values[3] = rain[i];
		w.rows[static_cast<std::size_t>(3 + i)].values[5] = temp[i];
	}
	const auto agg = between_target_features(w, TimeStamp{102}, TimeStamp{105});
	CHECK(agg == WeatherAggregate{3.0, 1.0, 1.0});

	const auto ten = constant_weather(0, 30, 0.0, 10.0);
	CHECK(between_target_features(ten, TimeStamp{0}, TimeStamp{20}).cold == 0.0);
	CHECK_THROWS_AS(between_target_features(ten, TimeStamp{20}, TimeStamp{40}), CoverageError);
}

TEST_CASE("between-target features match the day loop") {
	testing::Rng rng(21);
	for (int trial = 0; trial < 300; ++trial) {
		const auto w = testing::random_weather(rng, "c", 1000, 80);
		const EpochDay prev = 1000 + static_cast<EpochDay>(rng() % 50);
		const EpochDay cur = prev + 1 + static_cast<EpochDay>(rng() % 29);
		const auto got = between_target_features(w, TimeStamp{prev}, TimeStamp{cur});
		const auto want = testing::oracle_interval(w, prev, cur);
		CHECK(got.cold == want.cold);
		CHECK(got.hot == want.hot);
		CHECK(std::abs(got.rain - want.rain) <= 1e-12);
	}
}

TEST_CASE("rolling features") {
	const auto rain = constant_weather(0, 30, 1.0, 20.0);
	CHECK(rolling_features(rain, TimeStamp{20}, 7).rain == doctest::Approx(7.0).epsilon(1e-15));
	const auto fourteen = rolling_features(rain, TimeStamp{20}, 14);
	CHECK(fourteen == WeatherAggregate{14.0, 0.0, 0.0});
	CHECK_THROWS_AS(rolling_features(rain, TimeStamp{5}, 14), CoverageError);

	testing::Rng rng(5);
	for (int trial = 0; trial < 300; ++trial) {
		const auto w = testing::random_weather(rng, "c", 0, 60);
		const EpochDay at = 13 + static_cast<EpochDay>(rng() % 47);
		const auto r7 = rolling_features(w, TimeStamp{at}, 7);
		const auto r14 = rolling_features(w, TimeStamp{at}, 14);
		const auto o7 = testing::oracle_rolling(w, at, 7);
		const auto o14 = testing::oracle_rolling(w, at, 14);
		CHECK(r7.cold == o7.cold);
		CHECK(r7.hot == o7.hot);
		CHECK(std::abs(r7.rain - o7.rain) <= 1e-12);
		CHECK(r14.cold == o14.cold);
		CHECK(r14.hot == o14.hot);
		CHECK(std::abs(r14.rain - o14.rain) <= 1e-12);
		CHECK(r14.rain >= r7.rain);
		CHECK(r14.cold >= r7.cold);
		CHECK(r14.hot >= r7.hot);
	}
}

TEST_CASE("horizon scaling") {
	const std::vector<double> dt = {5, 10, 15};
	const auto g = horizon_scaling(dt, 2.0);
	REQUIRE(g.size() == 3);
	CHECK(g[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
	CHECK(g[1] == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
	CHECK(g[2] == 2.0);
}

TEST_CASE("perturbation identities") {
	testing::Rng rng(8);
	const auto w = testing::random_weather(rng, "c", 0, 10);
	std::vector<double> dt;
	for (int i = 1; i <= 10; ++i) {
		dt.push_back(i);
	}
	PerturbationConfig off;
	off.enabled = false;
	CHECK(perturb_future(w.rows, dt, off) == w.rows);
	PerturbationConfig on;
	CHECK(perturb_future(w.rows, dt, on, [] { return 0.0; }) == w.rows);
	CHECK(perturb_future(w.rows, dt, on) == perturb_future(w.rows, dt, on));
	CHECK_FALSE(perturb_future(w.rows, dt, on) == w.rows);
}

TEST_CASE("perturbation noise has the scheduled spread") {
	// Relative change of pressure (never clipped) divided by base * g_k should be standard normal.
	constexpr std::size_t kDays = 15;
	std::vector<WeatherRow> rows(kDays);
	for (auto &r : rows) {
		r.values = {3.0, 50.0, 200.0, 2.0, 1000.0, 15.0};
	}
	std::vector<double> dt;
	for (std::size_t i = 1; i <= kDays; ++i) {
		dt.push_back(static_cast<double>(i));
	}
	PerturbationConfig cfg;
	const auto g = horizon_scaling(dt, cfg.target_g_last);
	double sum = 0.0;
	double sq = 0.0;
	std::size_t n = 0;
	for (std::uint64_t seed = 0; seed < 2000; ++seed) {
		cfg.rng_seed = seed;
		const auto out = perturb_future(rows, dt, cfg);
		for (std::size_t k = 0; k < kDays; ++k) {
			const double z = (out[k].values[4] / 1000.0 - 1.0) / (cfg.base_noise * g[k]);
			sum += z;
			sq += z * z;
			++n;
		}
	}
	const double mean = sum / static_cast<double>(n);
	const double sd = std::sqrt(sq / static_cast<double>(n) - mean * mean);
	CHECK(std::abs(mean) < 0.05);
	CHECK(std::abs(sd - 1.0) < 0.05);
}

TEST_CASE("perturbation clips bounded variables") {
	std::vector<WeatherRow> rows(1);
	rows[0].values = {1.0, 99.0, 10.0, 1.0, 1000.0, 15.0};
	PerturbationConfig cfg;
	cfg.base_noise = 1.0;
	const std::vector<double> dt = {1.0};
	const auto up = perturb_future(rows, dt, cfg, [] { return 3.0; });
	CHECK(up[0].values[1] == 100.0);
	const auto down = perturb_future(rows, dt, cfg, [] { return -3.0; });
	CHECK(down[0].values[0] == 0.0);
	CHECK(down[0].values[2] == 0.0);
	CHECK(down[0].values[3] == 0.0);
	CHECK(down[0].values[5] < 0.0);
}

TEST_CASE("scaler examples") {
	VariableScaler v{2.0, 3.0, kScalerEpsilon};
	CHECK(apply_scaler(2.0, v) == 0.0);
	CHECK(apply_scaler(2.0 + std::sqrt(3.0 + kScalerEpsilon), v) == doctest::Approx(0.881373587019543).epsilon(1e-15));
	CHECK_THROWS_AS(fit_variable(std::span<const double>{}), InsufficientDataError);
	const std::vector<double> xs = {1, 2, 3, 4};
	const auto fit = fit_variable(xs);
	CHECK(fit.mu == 2.5);
	CHECK(fit.sigma2 == 1.25);
}

TEST_CASE("scaler round trip and monotonicity") {
	testing::Rng rng(13);
	std::normal_distribution<double> normal(0.0, 50.0);
	for (int trial = 0; trial < 500; ++trial) {
		VariableScaler v{normal(rng), std::abs(normal(rng)) + 0.1, kScalerEpsilon};
		const double x = normal(rng);
		const double y = x + std::abs(normal(rng)) + 1e-3;
		CHECK(invert_scaler(apply_scaler(x, v), v) == doctest::Approx(x).epsilon(1e-12));
		CHECK(apply_scaler(y, v) > apply_scaler(x, v));
	}
}

TEST_CASE("schema layout") {
	const auto s = default_schema();
	CHECK(s.historyWidth() == 22);
	CHECK(s.futureWidth() == 21);
	CHECK(s.history[0].name == "ndvi");
	CHECK(s.history[0].role == FeatureRole::target);
	CHECK(s.hash() == default_schema().hash());
	CHECK(s.hash() != default_schema(4, 3).hash());
}

TEST_CASE("sample assembly on a regular grid") {
	testing::Rng rng(31);
	const auto w = testing::random_weather(rng, "c", 985, 120);
	const std::vector<double> values = {0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6};
	auto series = testing::regular_series("c", 1000, 6, 5, values);
	const auto schema = default_schema();
	PipelineConfig cfg;
	const auto samples = build_raw_samples(series, w, schema, cfg, no_perturbation());
	REQUIRE(samples.size() == 1);
	const auto &s = samples[0];
	CHECK(s.futureLength() == 15);
	CHECK(s.selection_indices == std::vector<std::size_t>{4, 9, 14});
	CHECK(s.delta_days == std::vector<double>{5, 10, 15});
	CHECK(s.history_mask == Mask{1, 1, 1});
	CHECK(s.history_bt_valid == Mask{0, 1, 1});
	CHECK(s.targets == std::vector<double>{0.45, 0.5, 0.55});
	CHECK(s.last_history_day.day == 1010);

	// Every engineered column against the day-loop oracles.
	for (std::size_t k = 0; k < 3; ++k) {
		const EpochDay day = 1000 + 5 * static_cast<EpochDay>(k);
		CHECK(s.history_tokens(k, 0) == values[k]);
		for (std::size_t v = 0; v < 6; ++v) {
			CHECK(s.history_tokens(k, 1 + v) == w.at(day).values[v]);
		}
		if (k > 0) {
			const auto bt = testing::oracle_interval(w, day - 5, day);
			CHECK(s.history_tokens(k, 7) == doctest::Approx(bt.rain).epsilon(1e-12));
			CHECK(s.history_tokens(k, 8) == bt.cold);
			CHECK(s.history_tokens(k, 9) == bt.hot);
		}
		const auto r7 = testing::oracle_rolling(w, day, 7);
		const auto r14 = testing::oracle_rolling(w, day, 14);
		CHECK(s.history_tokens(k, 10) == doctest::Approx(r7.rain).epsilon(1e-12));
		CHECK(s.history_tokens(k, 11) == r7.cold);
		CHECK(s.history_tokens(k, 12) == r7.hot);
		CHECK(s.history_tokens(k, 13) == doctest::Approx(r14.rain).epsilon(1e-12));
		CHECK(s.history_tokens(k, 14) == r14.cold);
		CHECK(s.history_tokens(k, 15) == r14.hot);
		const auto cyc = cyclical_encoding(day_of_year(day));
		for (std::size_t c = 0; c < 6; ++c) {
			CHECK(s.history_tokens(k, 16 + c) == cyc[c]);
		}
	}
	for (std::size_t j = 0; j < 15; ++j) {
		const EpochDay day = 1011 + static_cast<EpochDay>(j);
		const EpochDay anchor = 1010 + 5 * static_cast<EpochDay>(j / 5);
		for (std::size_t v = 0; v < 6; ++v) {
			CHECK(s.future_tokens(j, v) == w.at(day).values[v]);
		}
		const auto bt = testing::oracle_interval(w, anchor, day);
		CHECK(s.future_tokens(j, 6) == doctest::Approx(bt.rain).epsilon(1e-12));
		CHECK(s.future_tokens(j, 7) == bt.cold);
		CHECK(s.future_tokens(j, 8) == bt.hot);
	}
}

TEST_CASE("cloudy history is masked when interpolation is off") {
	testing::Rng rng(4);
	const auto w = testing::random_weather(rng, "c", 970, 120);
	auto series = testing::regular_series("c", 1000, 6, 5, {0.3, 0.4, 0.5});
	series.points[1].value.reset();
	series.points[1].observed = false;
	PipelineConfig cfg;
	cfg.interpolate = false;
	const auto raw = build_raw_samples(series, w, default_schema(), cfg, no_perturbation());
	REQUIRE(raw.size() == 1);
	CHECK(raw[0].history_mask == Mask{1, 0, 1});

	cfg.interpolate = true;
	const auto filled = prepare_cube(series, w, default_schema(), cfg, no_perturbation());
	REQUIRE(filled.size() == 1);
	CHECK(filled[0].history_mask == Mask{1, 1, 1});
	CHECK(filled[0].history_targets[1] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("missing weather names the window") {
	testing::Rng rng(4);
	const auto w = testing::random_weather(rng, "c", 995, 20);
	const auto series = testing::regular_series("c", 1000, 6, 5, {0.3});
	CHECK_THROWS_WITH_AS(build_raw_samples(series, w, default_schema(), PipelineConfig{}, no_perturbation()),
	                     doctest::Contains("window 0"), CoverageError);
}

TEST_CASE("prepare_dataset is thread-count invariant") {
	testing::Rng rng(6);
	std::vector<ObservationSeries> series;
	std::vector<DailyWeather> weather;
	for (int c = 0; c < 7; ++c) {
		const std::string id = "c" + std::to_string(c);
		weather.push_back(testing::random_weather(rng, id, 970, 200));
		series.push_back(testing::regular_series(id, 1000, 25, 5, {0.2, 0.5, 0.4}));
	}
	const PerturbationConfig noise;
	const auto one = prepare_dataset(series, weather, default_schema(), PipelineConfig{}, noise, 1);
	const auto four = prepare_dataset(series, weather, default_schema(), PipelineConfig{}, noise, 4);
	CHECK(one.size() == 7 * expected_window_count(25, 3, 3, 4));
	CHECK(one == four);
}

TEST_CASE("scaled samples and cache round trip") {
	testing::Rng rng(12);
	const auto w = testing::random_weather(rng, "c", 970, 200);
	const auto series = testing::regular_series("c", 1000, 25, 5, {0.2, 0.5, 0.4, 0.7});
	const auto schema = default_schema();
	auto raw = prepare_cube(series, w, schema, PipelineConfig{}, PerturbationConfig{});
	const auto scaler = fit_sample_scaler(raw, schema);
	const auto reference = raw;
	scale_samples(raw, schema, scaler);
	for (std::size_t i = 0; i < raw.size(); ++i) {
		CHECK(raw[i].targets == reference[i].targets);
		const auto &ndvi = scaler.get("ndvi");
		CHECK(raw[i].history_tokens(2, 0) == apply_scaler(reference[i].history_tokens(2, 0), ndvi));
		if (!raw[i].history_bt_valid[0]) {
			CHECK(raw[i].history_tokens(0, 7) == 0.0);
		}
	}

	testing::TempDir dir;
	SampleSet set{schema, scaler, raw};
	write_sample_set(dir / "s.sqfs", set);
	CHECK(read_sample_set(dir / "s.sqfs") == set);
}
