#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqf/core/types.hpp"
#include "sqf/ingest/csv_io.hpp"

namespace sqf::ingest {

/// Days of weather emitted before the first acquisition so rolling windows are covered.
inline constexpr int kWeatherLeadDays = 14;
/// Nominal satellite revisit spacing.
inline constexpr int kRevisitDays = 5;

struct SyntheticConfig {
	int n_cubes = 240;
	int n_days = 150;
	double seasonal_amplitude = 0.25;
	double weather_coupling = 0.06;
	double cloud_probability = 0.2;
	std::uint64_t rng_seed = 42;
	/// Calendar years cubes are spread over (round-robin by cube index).
	int first_year = 2017;
	int n_years = 4;

	void validate() const;
};

/// Noise-free-of-observation latent NDVI for every day of a cube's target range.
struct DenseTruth {
	std::string cube_id;
	TimeStamp start;
	std::vector<double> values;
};

struct SyntheticDataset {
	std::vector<ObservationSeries> series;
	std::vector<DailyWeather> weather;
	std::vector<DenseTruth> truth;
	ClimateGroups groups;
};

/// Seasonal NDVI driven by AR(1) weather with seasonal means, sampled every five days and
/// randomly cloud-masked. Deterministic in `rng_seed`.
///
/// Cloud flags of cube `i` are drawn, one per acquisition in order, from
/// `std::bernoulli_distribution(cloud_probability)` over
/// `std::mt19937_64(derive_seed(rng_seed, "clouds", i))`.
SyntheticDataset generate_synthetic(const SyntheticConfig &config);

} // namespace sqf::ingest
