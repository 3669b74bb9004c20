#include "sqf/eval/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "sqf/core/error.hpp"
#include "sqf/core/numeric.hpp"
#include "sqf/model/network.hpp"
#include "sqf/pipeline/scaler.hpp"
#include "sqf/pipeline/schema.hpp"
#include "sqf/train/loss.hpp"

namespace sqf::eval {

namespace {

/// Flattened (window, step) pairs shared by the global, per-step and per-group slices.
struct Points {
	std::vector<double> truth;
	std::vector<double> lower;
	std::vector<double> median;
	std::vector<double> upper;
	std::vector<double> crps;
	std::vector<double> pinball;
};

SliceMetrics slice_metrics(const Points &p, const std::vector<std::size_t> &rows) {
	SliceMetrics s;
	s.count = rows.size();
	if (rows.empty()) {
		return s;
	}
	std::vector<double> y;
	std::vector<double> m;
	CompensatedSum crps;
	std::size_t inside = 0;
	for (auto r : rows) {
		y.push_back(p.truth[r]);
		m.push_back(p.median[r]);
		crps.add(p.crps[r]);
		inside += p.truth[r] >= p.lower[r] && p.truth[r] <= p.upper[r];
	}
	const auto pm = point_metrics(y, m);
	s.rmse = pm.rmse;
	s.mae = pm.mae;
	s.crps = crps.value() / static_cast<double>(rows.size());
	s.coverage = static_cast<double>(inside) / static_cast<double>(rows.size());
	s.r2 = r_squared(y, m);
	s.mean_bias = mean_bias(y, m);
	return s;
}

std::string group_of(const ClimateGroups *groups, const std::string &cube) {
	if (groups == nullptr) {
		return "";
	}
	auto it = groups->find(cube);
	return it == groups->end() ? "unknown" : it->second;
}

nlohmann::json slice_json(const SliceMetrics &s) {
	return {{"count", s.count}, {"rmse", s.rmse},         {"mae", s.mae},
	        {"crps", s.crps},   {"coverage", s.coverage}, {"r2", s.r2},
	        {"mean_bias", s.mean_bias}};
}

} // namespace

std::vector<double> valid_history(const ForecastSample &sample) {
	std::vector<double> out;
	for (std::size_t i = 0; i < sample.history_targets.size(); ++i) {
		if (i < sample.history_mask.size() && sample.history_mask[i]) {
			out.push_back(sample.history_targets[i]);
		}
	}
	return out;
}

double persistence_forecast(const ForecastSample &sample) {
	const auto history = valid_history(sample);
	if (history.empty()) {
		throw InsufficientDataError("window of cube '" + sample.cube_id + "' has no valid history observation");
	}
	return history.back();
}

MetricReport evaluate_predictions(std::span<const ForecastSample> samples,
                                  std::span<const QuantilePrediction> predictions, std::span<const double> levels,
                                  const ClimateGroups *groups) {
	if (samples.size() != predictions.size()) {
		throw ShapeError("evaluate: " + std::to_string(predictions.size()) + " predictions for " +
		                 std::to_string(samples.size()) + " samples");
	}
	if (samples.empty()) {
		throw InsufficientDataError("evaluate: no samples");
	}
	const std::size_t Q = levels.size();
	const std::size_t median_col = Q / 2;
	MetricReport report;
	report.samples = samples.size();

	Points pts;
	std::vector<std::size_t> step_of;
	std::vector<std::string> group_names;
	std::vector<double> persistence;
	std::vector<MaseSample> mase_model;
	std::vector<MaseSample> mase_persistence;
	std::vector<double> window_loss_model;
	std::vector<double> window_loss_persistence;
	std::size_t horizon = 0;

	for (std::size_t i = 0; i < samples.size(); ++i) {
		const auto &s = samples[i];
		const auto &pred = predictions[i].values;
		if (pred.rows != s.horizon() || pred.cols != Q) {
			throw ShapeError("evaluate: prediction for cube '" + s.cube_id + "' has the wrong shape");
		}
		horizon = std::max(horizon, s.horizon());
		const std::string group = group_of(groups, s.cube_id);
		const double naive = persistence_forecast(s);
		MaseSample mm{{}, {}, valid_history(s)};
		MaseSample mp{{}, {}, mm.history};
		double se_model = 0.0;
		double se_persistence = 0.0;
		for (std::size_t k = 0; k < s.horizon(); ++k) {
			const double y = s.targets[k];
			const auto row = pred.row(k);
			pts.truth.push_back(y);
			pts.lower.push_back(row[0]);
			pts.median.push_back(row[median_col]);
			pts.upper.push_back(row[Q - 1]);
			pts.crps.push_back(crps_from_quantiles(y, row, levels));
			double pin = 0.0;
			for (std::size_t q = 0; q < Q; ++q) {
				pin += train::pinball(y, row[q], levels[q]);
			}
			pts.pinball.push_back(pin / static_cast<double>(Q));
			step_of.push_back(k);
			group_names.push_back(group);
			persistence.push_back(naive);
			mm.truth.push_back(y);
			mm.prediction.push_back(row[median_col]);
			mp.truth.push_back(y);
			mp.prediction.push_back(naive);
			se_model += (y - row[median_col]) * (y - row[median_col]);
			se_persistence += (y - naive) * (y - naive);
			report.scatter.push_back({y, row[median_col], group, s.delta_days[k]});
		}
		window_loss_model.push_back(se_model / static_cast<double>(s.horizon()));
		window_loss_persistence.push_back(se_persistence / static_cast<double>(s.horizon()));
		mase_model.push_back(std::move(mm));
		mase_persistence.push_back(std::move(mp));
	}

	report.points = pts.truth.size();
	const auto pm = point_metrics(pts.truth, pts.median);
	report.rmse = pm.rmse;
	report.mae = pm.mae;
	report.wmape = pm.wmape;
	report.wmape_defined = pm.wmape_defined;
	const auto mm = mase(mase_model);
	report.mase = mm.value;
	report.mase_used = mm.used;
	report.mase_excluded = mm.excluded;
	report.crps = compensated_sum(pts.crps) / static_cast<double>(report.points);
	report.mean_pinball = compensated_sum(pts.pinball) / static_cast<double>(report.points);
	std::vector<std::size_t> all(report.points);
	for (std::size_t r = 0; r < all.size(); ++r) {
		all[r] = r;
	}
	const auto global = slice_metrics(pts, all);
	report.coverage = global.coverage;
	report.r2 = global.r2;
	report.mean_bias = global.mean_bias;

	for (std::size_t k = 0; k < horizon; ++k) {
		std::vector<std::size_t> rows;
		for (std::size_t r = 0; r < step_of.size(); ++r) {
			if (step_of[r] == k) {
				rows.push_back(r);
			}
		}
		report.per_step.push_back(slice_metrics(pts, rows));
	}
	if (groups != nullptr) {
		std::map<std::string, std::vector<std::size_t>> by_group;
		for (std::size_t r = 0; r < group_names.size(); ++r) {
			by_group[group_names[r]].push_back(r);
		}
		for (const auto &[name, rows] : by_group) {
			report.per_group[name] = slice_metrics(pts, rows);
		}
	}

	report.persistence = point_metrics(pts.truth, persistence);
	report.persistence_mase = mase(mase_persistence).value;
	const std::size_t lag = horizon > 0 ? horizon - 1 : 0;
	if (window_loss_model.size() >= lag + 2) {
		report.dm_vs_persistence = diebold_mariano(window_loss_model, window_loss_persistence, lag);
	}
	return report;
}

std::vector<QuantilePrediction> to_ndvi_units(std::vector<QuantilePrediction> scaled, const ScalerParams &scaler) {
	const auto &ndvi = scaler.get(pipeline::kTargetName);
	for (auto &p : scaled) {
		for (auto &v : p.values.data) {
			v = pipeline::invert_scaler(v, ndvi);
		}
	}
	return scaled;
}

MetricReport evaluate(const model::Checkpoint &checkpoint, std::uint64_t samples_schema_hash,
                      std::span<const ForecastSample> samples, const EvaluateOptions &options) {
	if (samples_schema_hash != checkpoint.schema_hash) {
		throw SchemaMismatchError("schema hash mismatch: checkpoint " + pipeline::format_hash(checkpoint.schema_hash) +
		                          ", samples " + pipeline::format_hash(samples_schema_hash));
	}
	auto scaled = model::predict(checkpoint.params, checkpoint.config, samples, options.batch_size, options.threads);
	const auto predictions = to_ndvi_units(std::move(scaled), checkpoint.scaler);
	return evaluate_predictions(samples, predictions, checkpoint.config.quantiles, options.groups);
}

void write_metrics_json(std::ostream &out, const MetricReport &r) {
	nlohmann::json j;
	j["samples"] = r.samples;
	j["points"] = r.points;
	j["rmse"] = r.rmse;
	j["mae"] = r.mae;
	j["wmape"] = r.wmape_defined ? nlohmann::json(r.wmape) : nlohmann::json(nullptr);
	j["wmape_defined"] = r.wmape_defined;
	j["mase"] = r.mase;
	j["mase_windows_used"] = r.mase_used;
	j["mase_windows_excluded"] = r.mase_excluded;
	j["crps"] = r.crps;
	j["crps_method"] = "quantile approximation: 2 * mean pinball over levels";
	j["mean_pinball"] = r.mean_pinball;
	j["coverage"] = r.coverage;
	j["r2"] = r.r2;
	j["mean_bias"] = r.mean_bias;
	nlohmann::json steps = nlohmann::json::array();
	for (std::size_t k = 0; k < r.per_step.size(); ++k) {
		auto s = slice_json(r.per_step[k]);
		s["step"] = k + 1;
		steps.push_back(s);
	}
	j["per_step"] = steps;
	nlohmann::json groups = nlohmann::json::object();
	for (const auto &[name, s] : r.per_group) {
		groups[name] = slice_json(s);
	}
	j["per_group"] = groups;
	j["persistence"] = {{"rmse", r.persistence.rmse},
	                    {"mae", r.persistence.mae},
	                    {"wmape", r.persistence.wmape},
	                    {"mase", r.persistence_mase}};
	if (r.dm_vs_persistence) {
		const auto &dm = *r.dm_vs_persistence;
		j["dm_vs_persistence"] = {{"loss", "window mean squared median error"},
		                          {"statistic", dm.degenerate ? nlohmann::json(nullptr) : nlohmann::json(dm.statistic)},
		                          {"p_value", dm.degenerate ? nlohmann::json(nullptr) : nlohmann::json(dm.p_value)},
		                          {"mean_difference", dm.mean_difference},
		                          {"degenerate", dm.degenerate}};
	}
	out << j.dump(2) << '\n';
}

void write_scatter_csv(std::ostream &out, const MetricReport &report) {
	out << "truth,prediction,group,delta_days\n";
	char line[128];
	for (const auto &p : report.scatter) {
		std::snprintf(line, sizeof line, "%.17g,%.17g,", p.truth, p.prediction);
		out << line << p.group;
		std::snprintf(line, sizeof line, ",%.17g\n", p.delta_days);
		out << line;
	}
}

} // namespace sqf::eval
