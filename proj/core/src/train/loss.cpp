#include "sqf/train/loss.hpp"

#include "sqf/core/error.hpp"
#include "sqf/pipeline/scaler.hpp"

namespace sqf::train {

double pinball(double y, double y_hat, double q) {
	const double r = y - y_hat;
	return r >= 0.0 ? q * r : (q - 1.0) * r;
}

double temporal_weight(double delta_days, double alpha) { return 1.0 / (1.0 + alpha * delta_days); }

LossTargets loss_targets(std::span<const ForecastSample> samples, std::span<const std::size_t> indices,
                         const VariableScaler *ndvi_scaler) {
	LossTargets t;
	t.batch = indices.size();
	t.horizon = indices.empty() ? 0 : samples[indices[0]].horizon();
	t.targets.reserve(t.batch * t.horizon);
	t.delta_days.reserve(t.batch * t.horizon);
	for (std::size_t i : indices) {
		const auto &s = samples[i];
		if (s.horizon() != t.horizon || s.delta_days.size() != t.horizon) {
			throw ShapeError("loss_targets: sample '" + s.cube_id + "' has a different horizon");
		}
		for (std::size_t k = 0; k < t.horizon; ++k) {
			t.targets.push_back(ndvi_scaler ? pipeline::apply_scaler(s.targets[k], *ndvi_scaler) : s.targets[k]);
			t.delta_days.push_back(s.delta_days[k]);
		}
	}
	return t;
}

LossTargets loss_targets(std::span<const ForecastSample> samples, const VariableScaler *ndvi_scaler) {
	std::vector<std::size_t> all(samples.size());
	for (std::size_t i = 0; i < all.size(); ++i) {
		all[i] = i;
	}
	return loss_targets(samples, all, ndvi_scaler);
}

diff::Tensor batch_loss(const diff::Tensor &predictions, const LossTargets &targets,
                        std::span<const double> quantiles, const LossOptions &options) {
	const std::size_t Q = quantiles.size();
	const diff::Shape expected{targets.batch, targets.horizon, Q};
	if (predictions.shape() != expected) {
		throw ShapeError("batch_loss: predictions " + diff::to_string(predictions.shape()) + " vs targets " +
		                 diff::to_string(expected));
	}
	const std::size_t rows = targets.batch * targets.horizon;
	if (rows == 0) {
		throw ShapeError("batch_loss: empty batch");
	}
	std::vector<double> weights(rows, 1.0);
	if (options.use_temporal_weights) {
		for (std::size_t i = 0; i < rows; ++i) {
			weights[i] = temporal_weight(targets.delta_days[i], options.alpha);
		}
	}
	const double norm = 1.0 / static_cast<double>(rows * Q);
	const auto y_hat = predictions.values();
	double total = 0.0;
	for (std::size_t i = 0; i < rows; ++i) {
		for (std::size_t q = 0; q < Q; ++q) {
			total += weights[i] * pinball(targets.targets[i], y_hat[i * Q + q], quantiles[q]);
		}
	}
	std::vector<double> levels(quantiles.begin(), quantiles.end());
	return diff::make_result({}, {total * norm}, {predictions}, "batch_loss",
	                         [weights = std::move(weights), levels = std::move(levels), y = targets.targets, norm,
	                          rows, Q](diff::Node &self) {
		                         auto &p = *self.parents[0];
		                         if (!p.requires_grad) {
			                         return;
		                         }
		                         auto g = p.ensureGrad();
		                         const double upstream = self.grad[0] * norm;
		                         for (std::size_t i = 0; i < rows; ++i) {
			                         for (std::size_t q = 0; q < Q; ++q) {
				                         const double r = y[i] - p.value[i * Q + q];
				                         const double d = r >= 0.0 ? -levels[q] : 1.0 - levels[q];
				                         g[i * Q + q] += upstream * weights[i] * d;
			                         }
		                         }
	                         });
}

} // namespace sqf::train
