#pragma once

#include <span>
#include <vector>

#include "sqf/core/types.hpp"
#include "sqf/diff/tensor.hpp"

namespace sqf::train {

/// |y − ŷ|·(q if y − ŷ ≥ 0 else 1 − q).
double pinball(double y, double y_hat, double q);

/// 1 / (1 + α·Δdays).
double temporal_weight(double delta_days, double alpha);

/// Flattened regression targets of a batch, row-major [B, h].
struct LossTargets {
	std::size_t batch = 0;
	std::size_t horizon = 0;
	std::vector<double> targets;
	std::vector<double> delta_days;
};

/// Targets of the selected samples, passed through `ndvi_scaler` when given.
LossTargets loss_targets(std::span<const ForecastSample> samples, std::span<const std::size_t> indices,
                         const VariableScaler *ndvi_scaler);
LossTargets loss_targets(std::span<const ForecastSample> samples, const VariableScaler *ndvi_scaler);

struct LossOptions {
	double alpha = 0.5;
	bool use_temporal_weights = true;
};

/// Mean over batch, steps and quantile levels of w_k·pinball for predictions [B, h, Q].
/// Weights are the raw 1/(1 + α·Δ) values, not renormalized; w_k ≡ 1 when disabled.
diff::Tensor batch_loss(const diff::Tensor &predictions, const LossTargets &targets,
                        std::span<const double> quantiles, const LossOptions &options);

} // namespace sqf::train
