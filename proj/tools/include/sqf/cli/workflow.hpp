#pragma once

#include <filesystem>
#include <vector>

#include "sqf/cli/run_config.hpp"
#include "sqf/eval/report.hpp"
#include "sqf/ingest/csv_io.hpp"
#include "sqf/model/checkpoint.hpp"
#include "sqf/pipeline/sample_cache.hpp"
#include "sqf/train/trainer.hpp"

namespace sqf::cli {

struct Dataset {
	std::vector<ObservationSeries> series;
	std::vector<DailyWeather> weather;
	ingest::ClimateGroups groups;
};

/// Targets (or pixels) and weather from the configured files, or the synthetic generator when
/// neither targets nor pixels are configured.
Dataset load_dataset(const RunConfig &config);

struct PreparedData {
	pipeline::SampleSet train;
	pipeline::SampleSet val;
	ingest::ClimateGroups groups;
};

/// Samples split by the calendar year of each cube's first acquisition. The scaler is fitted
/// on the training split only and applied to both.
PreparedData prepare_data(const RunConfig &config, const Dataset &dataset);

/// Files written by `prepare` under the output directory.
struct PreparedPaths {
	std::filesystem::path train;
	std::filesystem::path val;
	std::filesystem::path groups;
	std::filesystem::path fingerprint;
};
PreparedPaths prepared_paths(const RunConfig &config);

void write_prepared(const RunConfig &config, const PreparedData &data);

/// Cached samples when their fingerprint matches the config, otherwise prepares and caches them.
PreparedData load_or_prepare(const RunConfig &config);

struct TrainOutcome {
	train::TrainResult result;
	model::Checkpoint checkpoint;
};

TrainOutcome run_training(const RunConfig &config, const PreparedData &data,
                          const train::EpochCallback &on_epoch = {});

eval::MetricReport run_evaluation(const RunConfig &config, const model::Checkpoint &checkpoint,
                                  const pipeline::SampleSet &samples, const ingest::ClimateGroups *groups);

} // namespace sqf::cli
