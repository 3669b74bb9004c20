#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqf/core/types.hpp"
#include "sqf/eval/metrics.hpp"
#include "sqf/model/checkpoint.hpp"

namespace sqf::eval {

using ClimateGroups = std::map<std::string, std::string>;

/// Metrics over a set of (window, step) pairs in NDVI units.
struct SliceMetrics {
	std::size_t count = 0;
	double rmse = 0.0;
	double mae = 0.0;
	double crps = 0.0;
	double coverage = 0.0;
	double r2 = 0.0;
	double mean_bias = 0.0;
};

struct ScatterPoint {
	double truth = 0.0;
	double prediction = 0.0;
	std::string group;
	double delta_days = 0.0;
};

struct MetricReport {
	std::size_t samples = 0;
	std::size_t points = 0;
	double rmse = 0.0;
	double mae = 0.0;
	double wmape = 0.0;
	bool wmape_defined = true;
	double mase = 0.0;
	std::size_t mase_used = 0;
	std::size_t mase_excluded = 0;
	/// Quantile approximation of CRPS, 2 · mean pinball over the three levels.
	double crps = 0.0;
	double mean_pinball = 0.0;
	/// Fraction of truths inside [q_lowest, q_highest].
	double coverage = 0.0;
	double r2 = 0.0;
	double mean_bias = 0.0;
	std::vector<SliceMetrics> per_step;
	std::map<std::string, SliceMetrics> per_group;

	/// Last valid history NDVI carried forward.
	PointMetrics persistence;
	double persistence_mase = 0.0;
	/// DM test on per-window squared median error, model minus persistence.
	std::optional<DieboldMarianoResult> dm_vs_persistence;

	std::vector<ScatterPoint> scatter;
};

/// Persistence forecast of one window: its last valid history target.
/// Throws InsufficientDataError when the history has no valid entry.
double persistence_forecast(const ForecastSample &sample);

/// Valid history targets of a window in time order.
std::vector<double> valid_history(const ForecastSample &sample);

/// Metrics for predictions already in NDVI units, one per sample.
MetricReport evaluate_predictions(std::span<const ForecastSample> samples,
                                  std::span<const QuantilePrediction> predictions, std::span<const double> levels,
                                  const ClimateGroups *groups = nullptr);

/// Inverse-scales scaled-space predictions with the "ndvi" scaler.
std::vector<QuantilePrediction> to_ndvi_units(std::vector<QuantilePrediction> scaled, const ScalerParams &scaler);

struct EvaluateOptions {
	std::size_t batch_size = 256;
	std::size_t threads = 1;
	const ClimateGroups *groups = nullptr;
};

/// Runs the checkpointed model on `samples` and reports metrics in NDVI units.
/// Throws SchemaMismatchError naming both hashes when `samples_schema_hash` differs from the checkpoint's.
MetricReport evaluate(const model::Checkpoint &checkpoint, std::uint64_t samples_schema_hash,
                      std::span<const ForecastSample> samples, const EvaluateOptions &options = {});

void write_metrics_json(std::ostream &out, const MetricReport &report);
/// CSV `truth,prediction,group,delta_days`.
void write_scatter_csv(std::ostream &out, const MetricReport &report);

} // namespace sqf::eval
