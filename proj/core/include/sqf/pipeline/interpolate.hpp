#pragma once

#include "sqf/core/types.hpp"

namespace sqf::pipeline {

/// y0 + (t - t0) / (t1 - t0) * (y1 - y0).
double interpolate_value(double t0, double y0, double t1, double y1, double t);

/// Fills cloudy acquisitions lying strictly between two clear-sky observations by
/// time-aware linear interpolation. Leading and trailing cloudy acquisitions keep no value
/// (unrecoverable). No timestamps are added. Throws InsufficientDataError below two
/// observed points.
ObservationSeries interpolate_gaps(const ObservationSeries &series);

inline bool is_recoverable(const ObservationPoint &pt) { return pt.value.has_value(); }

} // namespace sqf::pipeline
