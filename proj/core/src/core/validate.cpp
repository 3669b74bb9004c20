#include "sqf/core/validate.hpp"

#include <cmath>
#include <sstream>

namespace sqf {

std::vector<Violation> validate_series(const ObservationSeries &series) {
	std::vector<Violation> out;
	for (std::size_t i = 0; i < series.points.size(); ++i) {
		const auto &pt = series.points[i];
		if (i > 0) {
			const auto prev = series.points[i - 1].timestamp.day;
			if (pt.timestamp.day == prev) {
				out.push_back({i, "duplicate day"});
			} else if (pt.timestamp.day < prev) {
				out.push_back({i, "timestamps not strictly increasing"});
			}
		}
		if (pt.observed) {
			if (!pt.value) {
				out.push_back({i, "observed point without value"});
			} else if (!std::isfinite(*pt.value) || *pt.value < -1.0 || *pt.value > 1.0) {
				out.push_back({i, "NDVI outside [-1, 1]"});
			}
		} else if (pt.value && !pt.interpolated) {
			out.push_back({i, "unobserved point carries a value"});
		} else if (pt.interpolated && !pt.value) {
			out.push_back({i, "interpolated point without value"});
		}
	}
	return out;
}

std::vector<Violation> validate_weather(const DailyWeather &weather) {
	std::vector<Violation> out;
	for (std::size_t i = 0; i < weather.rows.size(); ++i) {
		const auto &row = weather.rows[i];
		for (double v : row.values) {
			if (!std::isfinite(v)) {
				out.push_back({i, "non-finite weather value"});
				break;
			}
		}
		const double hum = row[WeatherVariable::humidity];
		if (hum < 0.0 || hum > 100.0) {
			out.push_back({i, "humidity outside [0, 100]"});
		}
		if (row.rainfall() < 0.0) {
			out.push_back({i, "negative rainfall"});
		}
	}
	return out;
}

std::vector<Violation> validate_sample(const ForecastSample &s) {
	std::vector<Violation> out;
	const std::size_t h = s.targets.size();
	if (s.history_mask.size() != s.history_tokens.rows) {
		out.push_back({0, "history mask length differs from history tokens"});
	}
	if (s.future_mask.size() != s.future_tokens.rows) {
		out.push_back({0, "future mask length differs from future tokens"});
	}
	if (s.selection_indices.size() != h || s.target_days.size() != h || s.delta_days.size() != h) {
		out.push_back({0, "horizon arrays disagree in length"});
		return out;
	}
	for (std::size_t k = 0; k < h; ++k) {
		const auto idx = s.selection_indices[k];
		if (idx >= s.future_tokens.rows) {
			out.push_back({k, "selection index outside future sequence"});
		}
		if (k > 0 && idx <= s.selection_indices[k - 1]) {
			out.push_back({k, "selection indices not strictly increasing"});
		}
		const double expected = static_cast<double>(s.target_days[k].day - s.last_history_day.day);
		if (s.delta_days[k] != expected) {
			out.push_back({k, "delta_days inconsistent with target day"});
		}
		if (s.delta_days[k] <= 0.0) {
			out.push_back({k, "delta_days not positive"});
		}
		if (k > 0 && s.delta_days[k] <= s.delta_days[k - 1]) {
			out.push_back({k, "delta_days not increasing"});
		}
		// Future token j covers day last_history_day + j + 1.
		if (idx < s.future_tokens.rows &&
		    static_cast<double>(idx + 1) != expected) {
			out.push_back({k, "selection index does not point at the target day"});
		}
		if (!std::isfinite(s.targets[k])) {
			out.push_back({k, "non-finite target"});
		}
	}
	bool any = false;
	for (auto m : s.history_mask) {
		any = any || m != 0;
	}
	if (!s.history_mask.empty() && !any) {
		out.push_back({0, "history fully masked"});
	}
	return out;
}

std::string describe(const std::vector<Violation> &violations) {
	std::ostringstream os;
	for (std::size_t i = 0; i < violations.size(); ++i) {
		if (i > 0) {
			os << "; ";
		}
		os << "index " << violations[i].index << ": " << violations[i].rule;
	}
	return os.str();
}

} // namespace sqf
