#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sqf/core/types.hpp"
#include "sqf/pipeline/perturb.hpp"
#include "sqf/pipeline/schema.hpp"
#include "sqf/pipeline/windows.hpp"

namespace sqf::pipeline {

struct PipelineConfig {
	std::size_t history = 3;
	std::size_t horizon = 3;
	std::size_t shift = 4;
	/// When false, cloudy history acquisitions are masked instead of interpolated.
	bool interpolate = true;

	void validate() const;
};

/// Builds unscaled samples for one cube. `series` must already be interpolated when
/// `config.interpolate` is set. Throws CoverageError naming the window when weather is missing.
std::vector<ForecastSample> build_raw_samples(const ObservationSeries &series, const DailyWeather &weather,
                                              const FeatureSchema &schema, const PipelineConfig &config,
                                              const PerturbationConfig &perturbation);

/// Interpolation (when enabled), windowing and raw sample assembly for one cube.
std::vector<ForecastSample> prepare_cube(const ObservationSeries &series, const DailyWeather &weather,
                                         const FeatureSchema &schema, const PipelineConfig &config,
                                         const PerturbationConfig &perturbation);

/// Runs prepare_cube over all cubes, matching weather by cube id. Output order follows `series`
/// regardless of `threads`.
std::vector<ForecastSample> prepare_dataset(std::span<const ObservationSeries> series,
                                            std::span<const DailyWeather> weather, const FeatureSchema &schema,
                                            const PipelineConfig &config, const PerturbationConfig &perturbation,
                                            unsigned threads = 1);

/// Global per-variable statistics over raw training samples. Invalid between-target entries
/// and masked history values are excluded.
ScalerParams fit_sample_scaler(std::span<const ForecastSample> raw_samples, const FeatureSchema &schema);

/// Scales every token column in place. Invalid between-target entries and masked NDVI
/// values are set to zero after scaling.
void scale_samples(std::span<ForecastSample> samples, const FeatureSchema &schema, const ScalerParams &scaler);

/// build_raw_samples followed by scale_samples.
std::vector<ForecastSample> build_samples(const ObservationSeries &series, const DailyWeather &weather,
                                          const FeatureSchema &schema, const PipelineConfig &config,
                                          const PerturbationConfig &perturbation, const ScalerParams &scaler);

} // namespace sqf::pipeline
