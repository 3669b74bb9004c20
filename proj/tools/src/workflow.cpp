#include "sqf/cli/workflow.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "sqf/core/calendar.hpp"
#include "sqf/core/error.hpp"
#include "sqf/core/log.hpp"
#include "sqf/ingest/ndvi.hpp"
#include "sqf/ingest/synthetic.hpp"
#include "sqf/pipeline/schema.hpp"

namespace sqf::cli {

namespace fs = std::filesystem;

Dataset load_dataset(const RunConfig &config) {
	Dataset d;
	if (config.data.targets.empty() && config.data.pixels.empty()) {
		auto synthetic = ingest::generate_synthetic(config.synthetic);
		d.series = std::move(synthetic.series);
		d.weather = std::move(synthetic.weather);
		d.groups = std::move(synthetic.groups);
		return d;
	}
	if (!config.data.targets.empty()) {
		d.series = ingest::read_targets_csv(config.data.targets);
	} else {
		const auto pixels = ingest::read_pixels_csv(config.data.pixels);
		d.series = ingest::series_from_pixel_table(pixels);
	}
	d.weather = ingest::read_weather_csv(config.data.weather);
	if (!config.data.groups.empty()) {
		d.groups = ingest::read_groups_csv(config.data.groups);
	}
	return d;
}

PreparedData prepare_data(const RunConfig &config, const Dataset &dataset) {
	const auto schema = pipeline::default_schema(config.pipeline.history, config.pipeline.horizon);
	std::map<std::string, int> year_of_cube;
	for (const auto &s : dataset.series) {
		if (!s.points.empty()) {
			year_of_cube[s.cube_id] = year_of(s.points.front().timestamp.day);
		}
	}
	auto samples = pipeline::prepare_dataset(dataset.series, dataset.weather, schema, config.pipeline,
	                                         config.perturbation, config.threads);
	auto contains = [](const std::vector<int> &years, int y) {
		return std::find(years.begin(), years.end(), y) != years.end();
	};
	PreparedData out;
	out.train.schema = schema;
	out.val.schema = schema;
	for (auto &s : samples) {
		const int year = year_of_cube.at(s.cube_id);
		if (contains(config.split.train_years, year)) {
			out.train.samples.push_back(std::move(s));
		} else if (contains(config.split.val_years, year)) {
			out.val.samples.push_back(std::move(s));
		}
	}
	if (out.train.samples.empty()) {
		throw InsufficientDataError("no training samples in the configured train_years");
	}
	if (out.val.samples.empty()) {
		throw InsufficientDataError("no validation samples in the configured val_years");
	}
	const auto scaler = pipeline::fit_sample_scaler(out.train.samples, schema);
	pipeline::scale_samples(out.train.samples, schema, scaler);
	pipeline::scale_samples(out.val.samples, schema, scaler);
	out.train.scaler = scaler;
	out.val.scaler = scaler;
	out.groups = dataset.groups;
	log::info("prepared " + std::to_string(out.train.samples.size()) + " training and " +
	          std::to_string(out.val.samples.size()) + " validation windows");
	return out;
}

PreparedPaths prepared_paths(const RunConfig &config) {
	const fs::path dir(config.output_dir);
	return {dir / "train.sqfs", dir / "val.sqfs", dir / "groups.csv", dir / "samples.fingerprint"};
}

void write_prepared(const RunConfig &config, const PreparedData &data) {
	const auto paths = prepared_paths(config);
	fs::create_directories(config.output_dir);
	pipeline::write_sample_set(paths.train, data.train);
	pipeline::write_sample_set(paths.val, data.val);
	ingest::write_groups_csv(paths.groups, data.groups);
	std::ofstream(paths.fingerprint) << pipeline::format_hash(data_fingerprint(config)) << '\n';
}

PreparedData load_or_prepare(const RunConfig &config) {
	const auto paths = prepared_paths(config);
	if (fs::exists(paths.train) && fs::exists(paths.val) && fs::exists(paths.fingerprint)) {
		std::string stored;
		std::ifstream(paths.fingerprint) >> stored;
		if (stored == pipeline::format_hash(data_fingerprint(config))) {
			PreparedData data;
			data.train = pipeline::read_sample_set(paths.train);
			data.val = pipeline::read_sample_set(paths.val);
			if (fs::exists(paths.groups)) {
				data.groups = ingest::read_groups_csv(paths.groups);
			}
			return data;
		}
		log::info("cached samples were prepared with different data settings; rebuilding");
	}
	auto data = prepare_data(config, load_dataset(config));
	write_prepared(config, data);
	return data;
}

TrainOutcome run_training(const RunConfig &config, const PreparedData &data, const train::EpochCallback &on_epoch) {
	const auto model_config = model::config_for_schema(data.train.schema, config.model);
	TrainOutcome out;
	out.result = train::train(data.train.samples, data.val.samples, data.train.scaler, model_config, config.train,
	                          on_epoch);
	out.checkpoint.config = out.result.config;
	out.checkpoint.schema_hash = data.train.schema.hash();
	out.checkpoint.scaler = data.train.scaler;
	out.checkpoint.params = out.result.best_params;
	return out;
}

eval::MetricReport run_evaluation(const RunConfig &config, const model::Checkpoint &checkpoint,
                                  const pipeline::SampleSet &samples, const ingest::ClimateGroups *groups) {
	eval::EvaluateOptions options;
	options.batch_size = config.eval_batch_size;
	options.threads = config.threads;
	options.groups = groups != nullptr && !groups->empty() ? groups : nullptr;
	return eval::evaluate(checkpoint, samples.schema.hash(), samples.samples, options);
}

} // namespace sqf::cli
