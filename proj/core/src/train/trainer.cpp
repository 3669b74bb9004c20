#include "sqf/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "sqf/core/error.hpp"
#include "sqf/core/log.hpp"
#include "sqf/core/seed.hpp"
#include "sqf/model/checkpoint.hpp"
#include "sqf/model/network.hpp"
#include "sqf/pipeline/schema.hpp"
#include "sqf/train/loss.hpp"
#include "sqf/train/optim.hpp"

namespace sqf::train {

void TrainConfig::validate() const {
	auto fail = [](const std::string &field, const std::string &why) {
		throw ConfigError("train." + field + ": " + why);
	};
	if (epochs == 0) fail("epochs", "must be positive");
	if (batch_size == 0) fail("batch_size", "must be positive");
	if (!(lr > 0.0)) fail("lr", "must be positive");
	if (!(lr_factor > 0.0 && lr_factor < 1.0)) fail("lr_factor", "must lie in (0, 1)");
	if (!(lr_min > 0.0)) fail("lr_min", "must be positive");
	if (lr_min > lr) fail("lr_min", "must not exceed lr");
	if (!(alpha >= 0.0)) fail("alpha", "must be non-negative");
	if (!ablation.future && !ablation.history && !ablation.target) {
		fail("ablation", "at least one branch must stay enabled");
	}
}

model::ModelConfig effective_model_config(model::ModelConfig config, const TrainConfig &train) {
	config.use_future = train.ablation.future;
	config.use_history_covariates = train.ablation.history;
	config.use_target = train.ablation.target;
	config.use_feature_engineering = train.use_feature_engineering;
	return config;
}

namespace {

LossOptions loss_options(const TrainConfig &c) { return {c.alpha, c.use_temporal_weights}; }

bool is_better(double candidate, double best) { return candidate < best; }

} // namespace

double evaluate_loss(const model::ModelParams &params, const model::ModelConfig &config,
                     std::span<const ForecastSample> samples, const ScalerParams &scaler, const TrainConfig &train,
                     std::size_t batch_size) {
	if (samples.empty()) {
		throw InsufficientDataError("evaluate_loss: no samples");
	}
	diff::NoGradGuard guard;
	const auto &ndvi = scaler.get(pipeline::kTargetName);
	double weighted = 0.0;
	for (std::size_t begin = 0; begin < samples.size(); begin += batch_size) {
		const auto chunk = samples.subspan(begin, std::min(batch_size, samples.size() - begin));
		const auto batch = model::make_batch(chunk);
		model::ForwardContext ctx;
		const auto y = model::forward(params, config, batch, ctx);
		const auto loss = batch_loss(y, loss_targets(chunk, &ndvi), config.quantiles, loss_options(train));
		weighted += loss.item() * static_cast<double>(chunk.size());
	}
	return weighted / static_cast<double>(samples.size());
}

TrainResult train(std::span<const ForecastSample> train_samples, std::span<const ForecastSample> val_samples,
                  const ScalerParams &scaler, const model::ModelConfig &model_config, const TrainConfig &config,
                  const EpochCallback &on_epoch) {
	config.validate();
	if (train_samples.empty() || val_samples.empty()) {
		throw InsufficientDataError("train: empty " + std::string(train_samples.empty() ? "training" : "validation") +
		                            " split");
	}
	TrainResult result;
	result.config = effective_model_config(model_config, config);
	result.config.validate();
	const auto &ndvi = scaler.get(pipeline::kTargetName);

	model::ModelParams params = model::init_params(result.config, derive_seed(config.rng_seed, "model", 0));
	result.best_params = model::clone_params(result.config, params);
	result.best_val_loss = std::numeric_limits<double>::infinity();

	std::vector<diff::Tensor> leaves;
	for (const auto &p : params.named()) {
		leaves.push_back(p.tensor);
	}
	Adam optimizer(leaves);
	PlateauScheduler scheduler(config.lr, {config.lr_factor, config.lr_patience, config.lr_min});
	const LossOptions options = loss_options(config);

	std::vector<std::size_t> order(train_samples.size());
	std::iota(order.begin(), order.end(), 0);

	try {
		for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
			const double lr = scheduler.lr();
			std::mt19937_64 shuffle_rng(derive_seed(config.rng_seed, "shuffle", epoch));
			std::shuffle(order.begin(), order.end(), shuffle_rng);

			double weighted = 0.0;
			std::size_t batch_index = 0;
			for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_index) {
				const std::span<const std::size_t> idx(order.data() + begin,
				                                       std::min(config.batch_size, order.size() - begin));
				const auto batch = model::make_batch(train_samples, idx);
				model::ForwardContext ctx(true, derive_seed(config.rng_seed, "dropout", (epoch << 32) | batch_index));
				optimizer.zeroGrad();
				const auto y = model::forward(params, result.config, batch, ctx);
				const auto loss = batch_loss(y, loss_targets(train_samples, idx, &ndvi), result.config.quantiles, options);
				if (!std::isfinite(loss.item())) {
					throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
					                   std::to_string(batch_index));
				}
				loss.backward();
				optimizer.step(lr);
				weighted += loss.item() * static_cast<double>(idx.size());
			}

			EpochRecord record;
			record.epoch = epoch;
			record.train_loss = weighted / static_cast<double>(order.size());
			record.val_loss = evaluate_loss(params, result.config, val_samples, scaler, config);
			record.lr = lr;
			if (!std::isfinite(record.val_loss)) {
				throw NumericError("non-finite validation loss at epoch " + std::to_string(epoch));
			}
			if (is_better(record.val_loss, result.best_val_loss)) {
				result.best_val_loss = record.val_loss;
				result.best_epoch = epoch;
				model::copy_param_values(params, result.best_params);
			}
			scheduler.step(record.val_loss);
			result.history.push_back(record);
			if (on_epoch) {
				on_epoch(record);
			}
		}
	} catch (const NumericError &e) {
		result.aborted = true;
		result.abort_reason = e.what();
		log::error(std::string("training aborted: ") + e.what());
	}
	return result;
}

void write_history_csv(std::ostream &out, const std::vector<EpochRecord> &history) {
	out << "epoch,train_loss,val_loss,lr\n";
	char line[160];
	for (const auto &r : history) {
		std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", r.epoch, r.train_loss, r.val_loss, r.lr);
		out << line;
	}
}

} // namespace sqf::train
