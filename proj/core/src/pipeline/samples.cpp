#include "sqf/pipeline/samples.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <optional>
#include <thread>

#include "sqf/core/error.hpp"
#include "sqf/core/log.hpp"
#include "sqf/core/seed.hpp"
#include "sqf/pipeline/features.hpp"
#include "sqf/pipeline/interpolate.hpp"
#include "sqf/pipeline/scaler.hpp"

namespace sqf::pipeline {

namespace {

constexpr std::size_t kCovariates = kWeatherVariables + kEngineeredFeatures + kCyclicalFeatures;
constexpr std::size_t kTargetColumn = static_cast<std::size_t>(-1);
constexpr int kLongestRollingWindow = 14;

using Covariates = std::array<double, kCovariates>;

/// Maps schema columns onto the canonical covariate order (raw, engineered, cyclical).
std::vector<std::size_t> column_map(const std::vector<Feature> &features) {
	std::map<std::string, std::size_t> canonical;
	std::size_t idx = 0;
	for (const char *n : kWeatherNames) {
		canonical[n] = idx++;
	}
	for (const char *n : kEngineeredNames) {
		canonical[n] = idx++;
	}
	for (const char *n : kCyclicalNames) {
		canonical[n] = idx++;
	}
	std::vector<std::size_t> out;
	for (const auto &f : features) {
		if (f.name == kTargetName) {
			out.push_back(kTargetColumn);
			continue;
		}
		auto it = canonical.find(f.name);
		if (it == canonical.end()) {
			throw ValidationError("unknown feature '" + f.name + "' in schema");
		}
		out.push_back(it->second);
	}
	return out;
}

bool is_between_target(const std::string &name) { return name == "rain_bt" || name == "cold_bt" || name == "hot_bt"; }

void put_aggregate(Covariates &cov, std::size_t offset, const WeatherAggregate &agg) {
	cov[offset] = agg.rain;
	cov[offset + 1] = agg.cold;
	cov[offset + 2] = agg.hot;
}

Covariates covariates_at(const DailyWeather &weather, EpochDay day, std::optional<EpochDay> anchor) {
	Covariates cov{};
	const auto &row = weather.at(day);
	for (std::size_t v = 0; v < kWeatherVariables; ++v) {
		cov[v] = row.values[v];
	}
	std::size_t off = kWeatherVariables;
	if (anchor) {
		put_aggregate(cov, off, between_target_features(weather, TimeStamp{*anchor}, TimeStamp{day}));
	}
	put_aggregate(cov, off + 3, rolling_features(weather, TimeStamp{day}, 7));
	put_aggregate(cov, off + 6, rolling_features(weather, TimeStamp{day}, 14));
	const auto cyc = cyclical_encoding(day_of_year(day));
	std::copy(cyc.begin(), cyc.end(), cov.begin() + static_cast<std::ptrdiff_t>(off + kEngineeredFeatures));
	return cov;
}

/// Observed weather up to `last_observed`, perturbed rows after it.
DailyWeather merged_view(const DailyWeather &weather, EpochDay first, EpochDay last_observed,
                         const std::vector<WeatherRow> &future_rows) {
	DailyWeather view;
	view.cube_id = weather.cube_id;
	view.start = TimeStamp{first};
	for (EpochDay d = first; d <= last_observed; ++d) {
		view.rows.push_back(weather.at(d));
	}
	view.rows.insert(view.rows.end(), future_rows.begin(), future_rows.end());
	return view;
}

} // namespace

void PipelineConfig::validate() const {
	if (history < 1 || horizon < 1 || shift < 1) {
		throw ConfigError("pipeline.history, pipeline.horizon and pipeline.shift must be >= 1");
	}
}

std::vector<ForecastSample> build_raw_samples(const ObservationSeries &series, const DailyWeather &weather,
                                              const FeatureSchema &schema, const PipelineConfig &config,
                                              const PerturbationConfig &perturbation) {
	config.validate();
	if (schema.history_length != config.history || schema.horizon != config.horizon) {
		throw SchemaMismatchError("schema window shape differs from pipeline configuration");
	}
	const auto hist_cols = column_map(schema.history);
	const auto fut_cols = column_map(schema.future);
	const auto windows = generate_windows(series, config.history, config.horizon, config.shift, !config.interpolate);
	const auto &pts = series.points;

	std::vector<ForecastSample> out;
	out.reserve(windows.size());
	for (std::size_t wi = 0; wi < windows.size(); ++wi) {
		const auto &w = windows[wi];
		const std::size_t last_hist_idx = w.start + w.history - 1;
		const EpochDay first_hist = pts[w.start].timestamp.day;
		const EpochDay last_hist = pts[last_hist_idx].timestamp.day;
		const EpochDay last_target = pts[w.end() - 1].timestamp.day;
		const std::optional<EpochDay> prev_acq =
		    w.start > 0 ? std::optional<EpochDay>(pts[w.start - 1].timestamp.day) : std::nullopt;

		EpochDay first_needed = first_hist - (kLongestRollingWindow - 1);
		if (prev_acq) {
			first_needed = std::min(first_needed, *prev_acq + 1);
		}
		if (!weather.covers(first_needed) || !weather.covers(last_target)) {
			throw CoverageError("cube '" + series.cube_id + "' window " + std::to_string(wi) + " (acquisitions " +
			                    std::to_string(w.start) + ".." + std::to_string(w.end() - 1) + ", " +
			                    format_iso_date(first_hist) + " .. " + format_iso_date(last_target) +
			                    "): weather does not cover " + format_iso_date(first_needed) + " .. " +
			                    format_iso_date(last_target));
		}

		ForecastSample s;
		s.cube_id = series.cube_id;
		s.last_history_day = TimeStamp{last_hist};

		s.history_tokens = Matrix(w.history, hist_cols.size());
		s.history_mask.assign(w.history, 1);
		s.history_bt_valid.assign(w.history, 1);
		for (std::size_t k = 0; k < w.history; ++k) {
			const std::size_t i = w.start + k;
			const EpochDay day = pts[i].timestamp.day;
			const std::optional<EpochDay> anchor =
			    i > 0 ? std::optional<EpochDay>(pts[i - 1].timestamp.day) : std::nullopt;
			const auto cov = covariates_at(weather, day, anchor);
			const bool present = pts[i].value.has_value();
			s.history_mask[k] = present ? 1 : 0;
			s.history_bt_valid[k] = anchor ? 1 : 0;
			s.history_targets.push_back(present ? *pts[i].value : 0.0);
			s.history_days.push_back(TimeStamp{day});
			for (std::size_t c = 0; c < hist_cols.size(); ++c) {
				s.history_tokens(k, c) = hist_cols[c] == kTargetColumn ? s.history_targets.back() : cov[hist_cols[c]];
			}
		}

		const auto length = static_cast<std::size_t>(last_target - last_hist);
		std::vector<WeatherRow> future_rows;
		std::vector<double> offsets;
		for (std::size_t j = 0; j < length; ++j) {
			const EpochDay day = last_hist + 1 + static_cast<EpochDay>(j);
			future_rows.push_back(weather.at(day));
			offsets.push_back(static_cast<double>(j + 1));
		}
		PerturbationConfig window_noise = perturbation;
		window_noise.rng_seed = derive_seed(perturbation.rng_seed, series.cube_id, w.start);
		const auto perturbed = perturb_future(future_rows, offsets, window_noise);
		const EpochDay view_first = last_hist + 1 - kLongestRollingWindow;
		const auto view = merged_view(weather, view_first, last_hist, perturbed);

		std::vector<EpochDay> acquisitions{last_hist};
		for (std::size_t k = 0; k < w.horizon; ++k) {
			const auto &pt = pts[w.start + w.history + k];
			const EpochDay day = pt.timestamp.day;
			acquisitions.push_back(day);
			s.targets.push_back(*pt.value);
			s.target_days.push_back(pt.timestamp);
			s.delta_days.push_back(static_cast<double>(day - last_hist));
			s.selection_indices.push_back(static_cast<std::size_t>(day - last_hist - 1));
		}

		s.future_tokens = Matrix(length, fut_cols.size());
		s.future_mask.assign(length, 1);
		std::size_t anchor_idx = 0;
		for (std::size_t j = 0; j < length; ++j) {
			const EpochDay day = last_hist + 1 + static_cast<EpochDay>(j);
			while (anchor_idx + 1 < acquisitions.size() && acquisitions[anchor_idx + 1] < day) {
				++anchor_idx;
			}
			const auto cov = covariates_at(view, day, acquisitions[anchor_idx]);
			for (std::size_t c = 0; c < fut_cols.size(); ++c) {
				s.future_tokens(j, c) = cov[fut_cols[c]];
			}
		}
		out.push_back(std::move(s));
	}
	return out;
}

std::vector<ForecastSample> prepare_cube(const ObservationSeries &series, const DailyWeather &weather,
                                         const FeatureSchema &schema, const PipelineConfig &config,
                                         const PerturbationConfig &perturbation) {
	if (config.interpolate) {
		return build_raw_samples(interpolate_gaps(series), weather, schema, config, perturbation);
	}
	return build_raw_samples(series, weather, schema, config, perturbation);
}

std::vector<ForecastSample> prepare_dataset(std::span<const ObservationSeries> series,
                                            std::span<const DailyWeather> weather, const FeatureSchema &schema,
                                            const PipelineConfig &config, const PerturbationConfig &perturbation,
                                            unsigned threads) {
	std::map<std::string, const DailyWeather *> by_cube;
	for (const auto &w : weather) {
		by_cube[w.cube_id] = &w;
	}
	const std::size_t n = series.size();
	std::vector<std::vector<ForecastSample>> per_cube(n);
	std::vector<std::exception_ptr> errors(n);

	auto work = [&](std::size_t c) {
		try {
			auto it = by_cube.find(series[c].cube_id);
			if (it == by_cube.end()) {
				throw CoverageError("no weather record for cube '" + series[c].cube_id + "'");
			}
			per_cube[c] = prepare_cube(series[c], *it->second, schema, config, perturbation);
		} catch (const InsufficientDataError &e) {
			log::warning(std::string(e.what()) + "; cube skipped");
		} catch (...) {
			errors[c] = std::current_exception();
		}
	};

	const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
	if (workers == 1) {
		for (std::size_t c = 0; c < n; ++c) {
			work(c);
		}
	} else {
		std::vector<std::thread> pool;
		for (unsigned t = 0; t < workers; ++t) {
			pool.emplace_back([&, t] {
				for (std::size_t c = t; c < n; c += workers) {
					work(c);
				}
			});
		}
		for (auto &th : pool) {
			th.join();
		}
	}
	std::vector<ForecastSample> out;
	for (std::size_t c = 0; c < n; ++c) {
		if (errors[c]) {
			std::rethrow_exception(errors[c]);
		}
		for (auto &s : per_cube[c]) {
			out.push_back(std::move(s));
		}
	}
	return out;
}

ScalerParams fit_sample_scaler(std::span<const ForecastSample> raw_samples, const FeatureSchema &schema) {
	const auto names = schema.variableNames();
	std::map<std::string, std::size_t> index;
	for (std::size_t i = 0; i < names.size(); ++i) {
		index[names[i]] = i;
	}
	std::vector<std::vector<double>> values(names.size());
	for (const auto &s : raw_samples) {
		for (std::size_t k = 0; k < s.history_tokens.rows; ++k) {
			for (std::size_t c = 0; c < schema.history.size(); ++c) {
				const auto &f = schema.history[c];
				if (f.role == FeatureRole::target && !s.history_mask[k]) {
					continue;
				}
				if (is_between_target(f.name) && !s.history_bt_valid[k]) {
					continue;
				}
				values[index[f.name]].push_back(s.history_tokens(k, c));
			}
		}
		for (std::size_t j = 0; j < s.future_tokens.rows; ++j) {
			for (std::size_t c = 0; c < schema.future.size(); ++c) {
				values[index[schema.future[c].name]].push_back(s.future_tokens(j, c));
			}
		}
		auto target_it = index.find(kTargetName);
		if (target_it != index.end()) {
			for (double t : s.targets) {
				values[target_it->second].push_back(t);
			}
		}
	}
	return fit_scaler(names, values);
}

void scale_samples(std::span<ForecastSample> samples, const FeatureSchema &schema, const ScalerParams &scaler) {
	std::vector<const VariableScaler *> hist;
	std::vector<const VariableScaler *> fut;
	for (const auto &f : schema.history) {
		hist.push_back(&scaler.get(f.name));
	}
	for (const auto &f : schema.future) {
		fut.push_back(&scaler.get(f.name));
	}
	for (auto &s : samples) {
		for (std::size_t k = 0; k < s.history_tokens.rows; ++k) {
			for (std::size_t c = 0; c < schema.history.size(); ++c) {
				const auto &f = schema.history[c];
				const bool drop = (f.role == FeatureRole::target && !s.history_mask[k]) ||
				                  (is_between_target(f.name) && !s.history_bt_valid[k]);
				auto &v = s.history_tokens(k, c);
				v = drop ? 0.0 : apply_scaler(v, *hist[c]);
			}
		}
		for (std::size_t j = 0; j < s.future_tokens.rows; ++j) {
			for (std::size_t c = 0; c < schema.future.size(); ++c) {
				auto &v = s.future_tokens(j, c);
				v = apply_scaler(v, *fut[c]);
			}
		}
	}
}

std::vector<ForecastSample> build_samples(const ObservationSeries &series, const DailyWeather &weather,
                                          const FeatureSchema &schema, const PipelineConfig &config,
                                          const PerturbationConfig &perturbation, const ScalerParams &scaler) {
	auto samples = build_raw_samples(series, weather, schema, config, perturbation);
	scale_samples(samples, schema, scaler);
	return samples;
}

} // namespace sqf::pipeline
