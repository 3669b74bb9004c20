#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sqf::eval {

struct PointMetrics {
	double rmse = 0.0;
	double mae = 0.0;
	double wmape = 0.0;
	/// False when Σ|y| = 0; wmape is then reported as 0.
	bool wmape_defined = true;
};

/// RMSE, MAE and WMAPE of median predictions. Throws std::invalid_argument on empty or unequal input.
PointMetrics point_metrics(std::span<const double> y, std::span<const double> y_hat);

/// Truth, median prediction and valid history targets of one forecast window.
struct MaseSample {
	std::vector<double> truth;
	std::vector<double> prediction;
	std::vector<double> history;
};

struct MaseResult {
	double value = 0.0;
	std::size_t used = 0;
	/// Windows with fewer than two history values or a zero naive scale.
	std::size_t excluded = 0;
};

/// In-sample one-step naive MAE of a history window, mean |y_t − y_{t−1}|.
double naive_scale(std::span<const double> history);

/// Mean over windows of (window MAE / window naive scale).
MaseResult mase(std::span<const MaseSample> samples);

/// 2 · mean over levels of pinball(y, prediction_q, q).
double crps_from_quantiles(double y, std::span<const double> quantile_values, std::span<const double> levels);

/// 1 − SSE/SST around the mean of y; 0 when SST = 0.
double r_squared(std::span<const double> y, std::span<const double> y_hat);

/// Mean of y_hat − y.
double mean_bias(std::span<const double> y, std::span<const double> y_hat);

struct DieboldMarianoResult {
	double statistic = 0.0;
	double p_value = 1.0;
	double mean_difference = 0.0;
	double long_run_variance = 0.0;
	/// Zero HAC variance with a nonzero mean difference; statistic and p-value are then meaningless.
	bool degenerate = false;
};

/// Newey–West HAC variance of d with Bartlett weights 1 − k/(lag+1), autocovariances scaled by 1/n.
double newey_west_variance(std::span<const double> d, std::size_t lag);

/// DM test on d = loss_a − loss_b with a two-sided normal p-value.
/// Throws std::invalid_argument when sizes differ or n < lag + 2.
DieboldMarianoResult diebold_mariano(std::span<const double> loss_a, std::span<const double> loss_b,
                                     std::size_t lag = 2);

} // namespace sqf::eval
