#include "sqf/pipeline/interpolate.hpp"

#include <optional>

#include "sqf/core/error.hpp"

namespace sqf::pipeline {

double interpolate_value(double t0, double y0, double t1, double y1, double t) {
	return y0 + (t - t0) / (t1 - t0) * (y1 - y0);
}

ObservationSeries interpolate_gaps(const ObservationSeries &series) {
	std::size_t observed = 0;
	for (const auto &pt : series.points) {
		observed += pt.observed ? 1 : 0;
	}
	if (observed < 2) {
		throw InsufficientDataError("cube '" + series.cube_id + "' has " + std::to_string(observed) +
		                            " clear-sky observations, need at least 2");
	}

	ObservationSeries out = series;
	std::optional<std::size_t> left;
	for (std::size_t i = 0; i < out.points.size(); ++i) {
		if (!out.points[i].observed) {
			continue;
		}
		if (left && i > *left + 1) {
			const auto &a = out.points[*left];
			const auto &b = out.points[i];
			const auto t0 = static_cast<double>(a.timestamp.day);
			const auto t1 = static_cast<double>(b.timestamp.day);
			for (std::size_t j = *left + 1; j < i; ++j) {
				auto &gap = out.points[j];
				gap.value = interpolate_value(t0, *a.value, t1, *b.value, static_cast<double>(gap.timestamp.day));
				gap.interpolated = true;
			}
		}
		left = i;
	}
	return out;
}

} // namespace sqf::pipeline
