#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sqf/core/types.hpp"

namespace sqf {

struct Violation {
	std::size_t index = 0;
	std::string rule;

	friend bool operator==(const Violation &, const Violation &) = default;
};

/// Diagnoses ObservationSeries invariants. Empty result means the series is valid.
std::vector<Violation> validate_series(const ObservationSeries &series);

/// Diagnoses DailyWeather invariants (physical ranges of humidity and rainfall).
std::vector<Violation> validate_weather(const DailyWeather &weather);

/// Diagnoses ForecastSample invariants. `index` refers to the offending horizon or token position.
std::vector<Violation> validate_sample(const ForecastSample &sample);

std::string describe(const std::vector<Violation> &violations);

} // namespace sqf
