#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sqf/core/types.hpp"
#include "sqf/pipeline/schema.hpp"

namespace sqf::pipeline {

/// Samples together with the schema and scaler they were produced under.
struct SampleSet {
	FeatureSchema schema;
	ScalerParams scaler;
	std::vector<ForecastSample> samples;

	friend bool operator==(const SampleSet &, const SampleSet &) = default;
};

/// Little-endian binary layout:
///
///   "SQF1" | u64 schema hash | u32 history length | u32 horizon | u32 F_h | u32 F_f | u64 sample count
///   feature names (u32 length + bytes, u8 role) for history then future columns
///   scaler: u32 count, then (name, f64 mu, f64 sigma2, f64 eps) per variable
///   per sample: cube id, history tokens (p x F_h f64, row-major), history mask (p x u8),
///   between-target validity (p x u8), history targets (p x f64), history days (p x i64),
///   u32 L, future tokens (L x F_f f64), future mask (L x u8), selection (h x u32),
///   targets (h x f64), target days (h x i64), last history day (i64), delta days (h x f64)
void write_sample_set(const std::filesystem::path &path, const SampleSet &set);
SampleSet read_sample_set(const std::filesystem::path &path);

} // namespace sqf::pipeline
