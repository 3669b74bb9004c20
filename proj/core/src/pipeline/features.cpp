#include "sqf/pipeline/features.hpp"

#include <cmath>
#include <numbers>

#include "sqf/core/error.hpp"
#include "sqf/core/numeric.hpp"

namespace sqf::pipeline {

std::array<double, 6> cyclical_encoding(int day_of_year) {
	if (day_of_year < 1 || day_of_year > 366) {
		throw std::invalid_argument("day of year " + std::to_string(day_of_year) + " outside [1, 366]");
	}
	std::array<double, 6> out{};
	const double base = 2.0 * std::numbers::pi * static_cast<double>(day_of_year - 1) / 366.0;
	for (int s = 1; s <= 3; ++s) {
		out[static_cast<std::size_t>(2 * (s - 1))] = std::sin(s * base);
		out[static_cast<std::size_t>(2 * (s - 1) + 1)] = std::cos(s * base);
	}
	return out;
}

namespace {

WeatherAggregate aggregate(const DailyWeather &weather, EpochDay after, EpochDay until) {
	if (!weather.coversInterval(after, until)) {
		throw CoverageError("weather for cube '" + weather.cube_id + "' does not cover " + format_iso_date(after + 1) +
		                    " .. " + format_iso_date(until));
	}
	CompensatedSum rain;
	WeatherAggregate out;
	for (EpochDay d = after + 1; d <= until; ++d) {
		const auto &row = weather.at(d);
		rain.add(row.rainfall());
		if (row.temperature() < kColdThreshold) {
			out.cold += 1.0;
		}
		if (row.temperature() > kHotThreshold) {
			out.hot += 1.0;
		}
	}
	out.rain = rain.value();
	return out;
}

} // namespace

WeatherAggregate between_target_features(const DailyWeather &weather, TimeStamp prev_day, TimeStamp cur_day) {
	if (!(prev_day.day < cur_day.day)) {
		throw std::invalid_argument("between-target interval requires prev_day < cur_day");
	}
	return aggregate(weather, prev_day.day, cur_day.day);
}

WeatherAggregate rolling_features(const DailyWeather &weather, TimeStamp at_day, int w) {
	if (w < 1) {
		throw std::invalid_argument("rolling window must be >= 1 day");
	}
	return aggregate(weather, at_day.day - w, at_day.day);
}

} // namespace sqf::pipeline
