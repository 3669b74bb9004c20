#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqf/ingest/synthetic.hpp"
#include "sqf/model/config.hpp"
#include "sqf/pipeline/perturb.hpp"
#include "sqf/pipeline/samples.hpp"
#include "sqf/train/trainer.hpp"

namespace sqf::cli {

struct DataPaths {
	/// Empty targets and pixels paths select the in-memory synthetic generator.
	std::string targets;
	std::string weather;
	std::string pixels;
	std::string groups;

	friend bool operator==(const DataPaths &, const DataPaths &) = default;
};

struct SplitSpec {
	std::vector<int> train_years{2017, 2018, 2019};
	std::vector<int> val_years{2020};

	friend bool operator==(const SplitSpec &, const SplitSpec &) = default;
};

/// Everything a command needs. Component seeds are derived from `seed`:
/// derive_seed(seed, "synthetic" | "perturbation" | "train", 0).
struct RunConfig {
	std::uint64_t seed = 42;
	unsigned threads = 1;
	std::string output_dir = "out";
	std::string log_level = "info";

	DataPaths data;
	SplitSpec split;
	ingest::SyntheticConfig synthetic;
	pipeline::PipelineConfig pipeline;
	pipeline::PerturbationConfig perturbation;
	model::ModelConfig model;
	train::TrainConfig train;
	std::size_t eval_batch_size = 256;

	/// Copies derived seeds into the component configs.
	void applySeeds();
	/// Throws ConfigError with the field path on the first violation.
	void validate() const;
};

/// Defaults overlaid with a parsed config file. Unknown tables or keys and type mismatches are
/// ConfigErrors naming `table.key` and the line.
RunConfig load_run_config(const std::string &path);
RunConfig parse_run_config(const std::string &text, const std::string &source = "config");

/// Every field with its effective value; parsing the result yields an equal configuration.
std::string to_toml(const RunConfig &config);

/// Hash of the settings that determine prepared samples.
std::uint64_t data_fingerprint(const RunConfig &config);

} // namespace sqf::cli
