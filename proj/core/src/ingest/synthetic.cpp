#include "sqf/ingest/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "sqf/core/error.hpp"
#include "sqf/core/numeric.hpp"
#include "sqf/core/seed.hpp"

namespace sqf::ingest {

namespace {

struct Climate {
	const char *name;
	double temp_mean;
	double temp_amplitude;
	double wet_threshold; // rain falls when the latent wetness exceeds this
	double rain_scale;
	double ndvi_base;
};

constexpr std::array<Climate, 4> kClimates = {{
    {"Semi-arid", 18.0, 9.0, 1.0, 5.0, 0.28},
    {"C-Med", 15.0, 8.0, 0.7, 6.0, 0.36},
    {"C-temp", 11.0, 7.0, 0.25, 4.0, 0.46},
    {"Continental", 8.0, 12.0, 0.4, 5.0, 0.42},
}};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double seasonal(EpochDay day, double phase) {
	return std::sin(kTwoPi * (static_cast<double>(day_of_year(day)) - phase) / 365.0);
}

std::string cube_name(int index) {
	char buf[32];
	std::snprintf(buf, sizeof(buf), "cube_%04d", index);
	return buf;
}

struct CubeOutput {
	ObservationSeries series;
	DailyWeather weather;
	DenseTruth truth;
	std::string group;
};

CubeOutput generate_cube(const SyntheticConfig &cfg, int index) {
	std::mt19937_64 rng(derive_seed(cfg.rng_seed, "synthetic", static_cast<std::uint64_t>(index)));
	std::normal_distribution<double> normal(0.0, 1.0);
	std::uniform_real_distribution<double> uniform(0.0, 1.0);

	const auto &climate = kClimates[static_cast<std::size_t>(uniform(rng) * kClimates.size()) % kClimates.size()];
	const int year = cfg.first_year + index % std::max(cfg.n_years, 1);
	const int start_doy = 1 + static_cast<int>(uniform(rng) * 200.0);
	const EpochDay start = epoch_day(year, 1, 1) + start_doy - 1;
	const EpochDay weather_start = start - kWeatherLeadDays;
	const int n_weather = cfg.n_days + kWeatherLeadDays;

	const double base = climate.ndvi_base + 0.08 * (2.0 * uniform(rng) - 1.0);
	const double amplitude = cfg.seasonal_amplitude * (0.6 + 0.6 * uniform(rng));
	const double phase = 90.0 + 40.0 * uniform(rng);

	CubeOutput out;
	const std::string id = cube_name(index);
	out.group = climate.name;
	out.weather.cube_id = id;
	out.weather.start = TimeStamp{weather_start};
	out.weather.rows.resize(static_cast<std::size_t>(n_weather));

	// AR(1) anomalies around seasonal means.
	double temp_anomaly = 3.0 * normal(rng);
	double wetness = normal(rng);
	double wind_state = normal(rng);
	std::vector<double> rain(static_cast<std::size_t>(n_weather));
	std::vector<double> temp_std(static_cast<std::size_t>(n_weather));
	for (int i = 0; i < n_weather; ++i) {
		const EpochDay day = weather_start + i;
		const double season = seasonal(day, 105.0);
		temp_anomaly = 0.8 * temp_anomaly + 1.8 * normal(rng);
		wetness = 0.7 * wetness + std::sqrt(1.0 - 0.49) * normal(rng);
		wind_state = 0.6 * wind_state + 0.8 * normal(rng);

		auto &row = out.weather.rows[static_cast<std::size_t>(i)];
		const double temperature = climate.temp_mean + climate.temp_amplitude * season + temp_anomaly;
		const double excess = wetness - climate.wet_threshold;
		const double rainfall = excess > 0.0 ? climate.rain_scale * (excess + 0.2) * -std::log(1.0 - uniform(rng)) : 0.0;
		row[WeatherVariable::temperature] = temperature;
		row[WeatherVariable::rainfall] = rainfall;
		row[WeatherVariable::humidity] = std::clamp(58.0 + 12.0 * wetness - 0.8 * temp_anomaly + 5.0 * normal(rng), 5.0, 100.0);
		row[WeatherVariable::radiation] = std::max(0.0, 180.0 + 120.0 * season - 35.0 * wetness + 20.0 * normal(rng));
		row[WeatherVariable::wind] = std::abs(3.0 + 1.5 * wind_state);
		row[WeatherVariable::pressure] = 1013.0 - 4.0 * wetness + 3.0 * normal(rng);
		rain[static_cast<std::size_t>(i)] = rainfall;
		temp_std[static_cast<std::size_t>(i)] = temp_anomaly / 3.0;
	}

	// Standardized rainfall driver, then an exponentially smoothed vegetation response.
	const double rain_mean = compensated_sum(rain) / static_cast<double>(n_weather);
	CompensatedSum sq;
	for (double r : rain) {
		sq.add((r - rain_mean) * (r - rain_mean));
	}
	const double rain_sd = std::sqrt(sq.value() / static_cast<double>(n_weather)) + 1e-9;

	constexpr double kSmoothing = 1.0 / 12.0;
	double response = 0.0;
	out.truth.cube_id = id;
	out.truth.start = TimeStamp{start};
	out.truth.values.reserve(static_cast<std::size_t>(cfg.n_days));
	for (int i = 0; i < n_weather; ++i) {
		const auto &row = out.weather.rows[static_cast<std::size_t>(i)];
		double driver = (rain[static_cast<std::size_t>(i)] - rain_mean) / rain_sd - temp_std[static_cast<std::size_t>(i)];
		if (row.temperature() > 30.0) {
			driver -= 1.0;
		}
		response = (1.0 - kSmoothing) * response + kSmoothing * driver;
		const double noise = 0.01 * normal(rng);
		if (i < kWeatherLeadDays) {
			continue;
		}
		const EpochDay day = weather_start + i;
		const double latent = base + amplitude * seasonal(day, phase) + cfg.weather_coupling * response + noise;
		out.truth.values.push_back(std::clamp(latent, -1.0, 1.0));
	}

	std::mt19937_64 cloud_rng(derive_seed(cfg.rng_seed, "clouds", static_cast<std::uint64_t>(index)));
	std::bernoulli_distribution cloudy(cfg.cloud_probability);
	out.series.cube_id = id;
	for (int offset = 0; offset < cfg.n_days; offset += kRevisitDays) {
		ObservationPoint pt;
		pt.timestamp = TimeStamp{start + offset};
		if (!cloudy(cloud_rng)) {
			pt.observed = true;
			pt.value = out.truth.values[static_cast<std::size_t>(offset)];
		}
		out.series.points.push_back(pt);
	}
	return out;
}

} // namespace

void SyntheticConfig::validate() const {
	if (n_cubes < 1) {
		throw ConfigError("synthetic.n_cubes must be >= 1");
	}
	if (n_days < kRevisitDays) {
		throw ConfigError("synthetic.n_days must be >= " + std::to_string(kRevisitDays));
	}
	if (!(cloud_probability >= 0.0 && cloud_probability < 1.0)) {
		throw ConfigError("synthetic.cloud_probability must lie in [0, 1)");
	}
	if (seasonal_amplitude < 0.0 || weather_coupling < 0.0) {
		throw ConfigError("synthetic amplitudes must be non-negative");
	}
	if (n_years < 1) {
		throw ConfigError("synthetic.n_years must be >= 1");
	}
}

SyntheticDataset generate_synthetic(const SyntheticConfig &config) {
	config.validate();
	SyntheticDataset data;
	for (int c = 0; c < config.n_cubes; ++c) {
		auto cube = generate_cube(config, c);
		data.groups[cube.series.cube_id] = cube.group;
		data.series.push_back(std::move(cube.series));
		data.weather.push_back(std::move(cube.weather));
		data.truth.push_back(std::move(cube.truth));
	}
	return data;
}

} // namespace sqf::ingest
