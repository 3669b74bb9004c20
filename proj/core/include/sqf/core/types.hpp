#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqf/core/calendar.hpp"

namespace sqf {

using Mask = std::vector<std::uint8_t>;

/// Dense row-major matrix of doubles.
struct Matrix {
	std::size_t rows = 0;
	std::size_t cols = 0;
	std::vector<double> data;

	Matrix() = default;
	Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

	double &operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
	double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

	std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
	std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

	friend bool operator==(const Matrix &, const Matrix &) = default;
};

/// One acquisition of the target series.
struct ObservationPoint {
	TimeStamp timestamp;
	std::optional<double> value;
	bool observed = false;
	/// Set when `value` was reconstructed from neighbouring clear-sky points.
	bool interpolated = false;

	bool hasValue() const { return value.has_value(); }

	friend bool operator==(const ObservationPoint &, const ObservationPoint &) = default;
};

/// Irregular NDVI series for one cube, ordered by acquisition day.
struct ObservationSeries {
	std::string cube_id;
	std::vector<ObservationPoint> points;

	std::size_t size() const { return points.size(); }

	friend bool operator==(const ObservationSeries &, const ObservationSeries &) = default;
};

enum class WeatherVariable : std::size_t { wind = 0, humidity, radiation, rainfall, pressure, temperature };

inline constexpr std::size_t kWeatherVariables = 6;

inline constexpr std::array<const char *, kWeatherVariables> kWeatherNames = {
    "wind", "humidity", "radiation", "rainfall", "pressure", "temperature"};

/// One day of meteorology: wind m/s, humidity %, radiation W/m^2, rainfall mm, pressure hPa, temperature degC.
struct WeatherRow {
	std::array<double, kWeatherVariables> values{};

	double &operator[](WeatherVariable v) { return values[static_cast<std::size_t>(v)]; }
	double operator[](WeatherVariable v) const { return values[static_cast<std::size_t>(v)]; }

	double rainfall() const { return (*this)[WeatherVariable::rainfall]; }
	double temperature() const { return (*this)[WeatherVariable::temperature]; }

	friend bool operator==(const WeatherRow &, const WeatherRow &) = default;
};

/// Contiguous daily weather for one cube starting at `start`.
struct DailyWeather {
	std::string cube_id;
	TimeStamp start;
	std::vector<WeatherRow> rows;

	EpochDay firstDay() const { return start.day; }
	/// One past the last covered day.
	EpochDay endDay() const { return start.day + static_cast<EpochDay>(rows.size()); }
	bool covers(EpochDay day) const { return day >= firstDay() && day < endDay(); }
	/// True when every day in the half-open interval (after, until] is present.
	bool coversInterval(EpochDay after, EpochDay until) const {
		return until <= after || (covers(after + 1) && covers(until));
	}
	const WeatherRow &at(EpochDay day) const { return rows[static_cast<std::size_t>(day - start.day)]; }

	friend bool operator==(const DailyWeather &, const DailyWeather &) = default;
};

enum class FeatureRole : std::uint8_t { target = 0, raw_weather = 1, engineered = 2, cyclical = 3 };

/// One model-ready training or evaluation window.
///
/// History tokens live at target-observation resolution (one per past acquisition),
/// future tokens at daily resolution over (last_history_day, last target day].
/// Token features are scaled; `targets` and `history_targets` are in NDVI units.
struct ForecastSample {
	std::string cube_id;
	Matrix history_tokens;
	Mask history_mask;
	/// Between-target features of a history token are only defined when a preceding acquisition exists.
	Mask history_bt_valid;
	Matrix future_tokens;
	Mask future_mask;
	std::vector<std::size_t> selection_indices;
	std::vector<double> targets;
	std::vector<TimeStamp> target_days;
	std::vector<double> history_targets;
	std::vector<TimeStamp> history_days;
	TimeStamp last_history_day;
	std::vector<double> delta_days;

	std::size_t historyLength() const { return history_tokens.rows; }
	std::size_t futureLength() const { return future_tokens.rows; }
	std::size_t horizon() const { return targets.size(); }

	friend bool operator==(const ForecastSample &, const ForecastSample &) = default;
};

inline constexpr std::array<double, 3> kQuantileLevels = {0.1, 0.5, 0.9};

/// Predicted quantiles, one row per horizon step, columns at kQuantileLevels.
struct QuantilePrediction {
	Matrix values;

	double lower(std::size_t step) const { return values(step, 0); }
	double median(std::size_t step) const { return values(step, 1); }
	double upper(std::size_t step) const { return values(step, 2); }

	friend bool operator==(const QuantilePrediction &, const QuantilePrediction &) = default;
};

struct VariableScaler {
	double mu = 0.0;
	double sigma2 = 1.0;
	double eps = 1e-8;

	friend bool operator==(const VariableScaler &, const VariableScaler &) = default;
};

/// Per-variable arcsinh scaling parameters, keyed by feature name.
struct ScalerParams {
	std::vector<std::string> names;
	std::vector<VariableScaler> variables;

	const VariableScaler &get(const std::string &name) const;
	std::size_t size() const { return variables.size(); }

	friend bool operator==(const ScalerParams &, const ScalerParams &) = default;
};

} // namespace sqf
