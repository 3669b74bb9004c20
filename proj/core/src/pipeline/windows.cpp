#include "sqf/pipeline/windows.hpp"

#include "sqf/core/error.hpp"

namespace sqf::pipeline {

std::size_t expected_window_count(std::size_t n, std::size_t p, std::size_t h, std::size_t shift) {
	if (n < p + h) {
		return 0;
	}
	return (n - p - h) / shift + 1;
}

std::vector<Window> generate_windows(const ObservationSeries &series, std::size_t p, std::size_t h, std::size_t shift,
                                     bool allow_masked_history) {
	if (p == 0 || h == 0 || shift == 0) {
		throw ValidationError("window history, horizon and shift must be >= 1");
	}
	std::vector<Window> out;
	const std::size_t n = series.points.size();
	for (std::size_t start = 0; start + p + h <= n; start += shift) {
		bool keep = true;
		bool any_history = false;
		for (std::size_t i = start; i < start + p + h; ++i) {
			const bool has = series.points[i].value.has_value();
			const bool is_history = i < start + p;
			if (is_history) {
				any_history = any_history || has;
				if (!has && !allow_masked_history) {
					keep = false;
				}
			} else if (!has) {
				keep = false;
			}
		}
		if (keep && any_history) {
			out.push_back({start, p, h});
		}
	}
	return out;
}

} // namespace sqf::pipeline
