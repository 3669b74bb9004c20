#pragma once

#include <span>
#include <string>
#include <vector>

#include "sqf/core/error.hpp"
#include "sqf/core/types.hpp"

namespace sqf::ingest {

/// Raised when a pixel's NIR + red reflectance is zero.
class UndefinedPixelError : public Error {
public:
	using Error::Error;
};

struct PixelRecord {
	std::string cube_id;
	TimeStamp day;
	int row = 0;
	int col = 0;
	double b02 = 0.0;
	double b03 = 0.0;
	double b04 = 0.0;
	double b8a = 0.0;
	bool cloud = false;

	friend bool operator==(const PixelRecord &, const PixelRecord &) = default;
};

/// (B8A - B04) / (B8A + B04).
double ndvi_from_bands(double b8a, double b04);

/// Builds one cube's series: one point per acquisition day, NDVI averaged over clear pixels.
/// Days whose pixels are all cloudy become unobserved points.
ObservationSeries series_from_pixels(std::span<const PixelRecord> pixels);

/// As above, but every listed acquisition day must have pixel records (InputFormatError otherwise).
ObservationSeries series_from_pixels(std::span<const PixelRecord> pixels, std::span<const EpochDay> acquisition_days);

/// Groups pixels by cube (first-appearance order) and builds one series per cube.
std::vector<ObservationSeries> series_from_pixel_table(std::span<const PixelRecord> pixels);

} // namespace sqf::ingest
