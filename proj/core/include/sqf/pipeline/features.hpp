#pragma once

#include <array>

#include "sqf/core/types.hpp"

namespace sqf::pipeline {

inline constexpr double kColdThreshold = 10.0;
inline constexpr double kHotThreshold = 30.0;

/// Fourier day-of-year encoding: (sin1, cos1, sin2, cos2, sin3, cos3) with phase 2*pi*s*(d-1)/366.
std::array<double, 6> cyclical_encoding(int day_of_year);

/// Cumulative rainfall and counts of cold (< 10 degC) and hot (> 30 degC) days.
struct WeatherAggregate {
	double rain = 0.0;
	double cold = 0.0;
	double hot = 0.0;

	friend bool operator==(const WeatherAggregate &, const WeatherAggregate &) = default;
};

/// Aggregates over the half-open day interval (prev_day, cur_day].
WeatherAggregate between_target_features(const DailyWeather &weather, TimeStamp prev_day, TimeStamp cur_day);

/// Aggregates over the w days ending at and including at_day: (at_day - w, at_day].
WeatherAggregate rolling_features(const DailyWeather &weather, TimeStamp at_day, int w);

} // namespace sqf::pipeline
