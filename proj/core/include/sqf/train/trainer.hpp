#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sqf/core/types.hpp"
#include "sqf/model/params.hpp"

namespace sqf::train {

/// Which input branches reach the network.
struct BranchSwitches {
	bool future = true;
	bool history = true;
	bool target = true;

	friend bool operator==(const BranchSwitches &, const BranchSwitches &) = default;
};

struct TrainConfig {
	std::size_t epochs = 200;
	std::size_t batch_size = 128;
	double lr = 1e-4;
	double lr_factor = 0.2;
	std::size_t lr_patience = 20;
	double lr_min = 5e-5;
	/// Decay rate of the temporal loss weight.
	double alpha = 0.5;
	bool use_temporal_weights = true;
	bool use_feature_engineering = true;
	BranchSwitches ablation;
	std::uint64_t rng_seed = 42;

	/// Throws ConfigError naming the offending field.
	void validate() const;

	friend bool operator==(const TrainConfig &, const TrainConfig &) = default;
};

/// Model configuration with the training-time input switches applied.
model::ModelConfig effective_model_config(model::ModelConfig config, const TrainConfig &train);

struct EpochRecord {
	std::size_t epoch = 0;
	double train_loss = 0.0;
	double val_loss = 0.0;
	double lr = 0.0;

	friend bool operator==(const EpochRecord &, const EpochRecord &) = default;
};

struct TrainResult {
	model::ModelConfig config;
	/// Parameters at the epoch with the lowest validation loss.
	model::ModelParams best_params;
	std::vector<EpochRecord> history;
	std::size_t best_epoch = 0;
	double best_val_loss = 0.0;
	/// Set when a numeric failure stopped training; best_params is the last good state.
	bool aborted = false;
	std::string abort_reason;
};

using EpochCallback = std::function<void(const EpochRecord &)>;

/// Mini-batch training with seeded shuffling and dropout, plateau scheduling and best-checkpoint
/// retention. Targets are scaled with scaler "ndvi"; tokens must already be scaled.
TrainResult train(std::span<const ForecastSample> train_samples, std::span<const ForecastSample> val_samples,
                  const ScalerParams &scaler, const model::ModelConfig &model_config, const TrainConfig &config,
                  const EpochCallback &on_epoch = {});

/// Weighted pinball loss of `params` on `samples` in inference mode, mean over all entries.
double evaluate_loss(const model::ModelParams &params, const model::ModelConfig &config,
                     std::span<const ForecastSample> samples, const ScalerParams &scaler, const TrainConfig &train,
                     std::size_t batch_size = 512);

/// CSV with header `epoch,train_loss,val_loss,lr`.
void write_history_csv(std::ostream &out, const std::vector<EpochRecord> &history);

} // namespace sqf::train
