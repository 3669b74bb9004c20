#include "sqf/ingest/ndvi.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "sqf/core/log.hpp"
#include "sqf/core/numeric.hpp"

namespace sqf::ingest {

double ndvi_from_bands(double b8a, double b04) {
	const double denom = b8a + b04;
	if (denom == 0.0) {
		throw UndefinedPixelError("NDVI undefined: B8A + B04 = 0");
	}
	return (b8a - b04) / denom;
}

namespace {

ObservationPoint aggregate_day(const std::string &cube_id, EpochDay day, std::vector<const PixelRecord *> &pixels) {
	std::vector<double> values;
	values.reserve(pixels.size());
	for (const auto *px : pixels) {
		if (px->cloud) {
			continue;
		}
		try {
			values.push_back(ndvi_from_bands(px->b8a, px->b04));
		} catch (const UndefinedPixelError &) {
			// skipped
		}
	}
	ObservationPoint pt;
	pt.timestamp = TimeStamp{day};
	if (values.empty()) {
		return pt;
	}
	// Sorting makes the mean independent of record order.
	std::sort(values.begin(), values.end());
	double mean = compensated_sum(values) / static_cast<double>(values.size());
	if (mean < -1.0 || mean > 1.0) {
		log::warning("cube " + cube_id + " day " + format_iso_date(day) + ": NDVI " + std::to_string(mean) +
		             " outside [-1, 1], clamped");
		mean = std::clamp(mean, -1.0, 1.0);
	}
	pt.value = mean;
	pt.observed = true;
	return pt;
}

} // namespace

ObservationSeries series_from_pixels(std::span<const PixelRecord> pixels) {
	std::set<EpochDay> days;
	for (const auto &px : pixels) {
		days.insert(px.day.day);
	}
	const std::vector<EpochDay> ordered(days.begin(), days.end());
	return series_from_pixels(pixels, ordered);
}

ObservationSeries series_from_pixels(std::span<const PixelRecord> pixels, std::span<const EpochDay> acquisition_days) {
	ObservationSeries series;
	std::map<EpochDay, std::vector<const PixelRecord *>> by_day;
	for (const auto &px : pixels) {
		if (series.cube_id.empty()) {
			series.cube_id = px.cube_id;
		} else if (px.cube_id != series.cube_id) {
			throw InputFormatError("pixels from several cubes passed to series_from_pixels: '" + series.cube_id +
			                       "' and '" + px.cube_id + "'");
		}
		by_day[px.day.day].push_back(&px);
	}
	std::vector<EpochDay> days(acquisition_days.begin(), acquisition_days.end());
	std::sort(days.begin(), days.end());
	for (std::size_t i = 0; i < days.size(); ++i) {
		if (i > 0 && days[i] == days[i - 1]) {
			throw InputFormatError("duplicate acquisition day " + format_iso_date(days[i]));
		}
		auto it = by_day.find(days[i]);
		if (it == by_day.end() || it->second.empty()) {
			throw InputFormatError("acquisition " + format_iso_date(days[i]) + " of cube '" + series.cube_id +
			                       "' has no pixel records");
		}
		series.points.push_back(aggregate_day(series.cube_id, days[i], it->second));
	}
	return series;
}

std::vector<ObservationSeries> series_from_pixel_table(std::span<const PixelRecord> pixels) {
	std::vector<std::string> order;
	std::map<std::string, std::vector<PixelRecord>> by_cube;
	for (const auto &px : pixels) {
		auto [it, inserted] = by_cube.try_emplace(px.cube_id);
		if (inserted) {
			order.push_back(px.cube_id);
		}
		it->second.push_back(px);
	}
	std::vector<ObservationSeries> out;
	out.reserve(order.size());
	for (const auto &id : order) {
		out.push_back(series_from_pixels(by_cube[id]));
	}
	return out;
}

} // namespace sqf::ingest
