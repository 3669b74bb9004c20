#include "sqf/pipeline/perturb.hpp"

#include <algorithm>
#include <random>

#include "sqf/core/error.hpp"

namespace sqf::pipeline {

void PerturbationConfig::validate() const {
	if (!(base_noise >= 0.0)) {
		throw ConfigError("perturbation.base_noise must be >= 0");
	}
	if (!(target_g_last >= 1.0)) {
		throw ConfigError("perturbation.target_g_last must be >= 1");
	}
}

std::vector<double> horizon_scaling(std::span<const double> delta_t_days, double target_g_last) {
	if (delta_t_days.empty()) {
		return {};
	}
	const double last = delta_t_days.back();
	if (!(last > 0.0)) {
		throw std::invalid_argument("last future offset must be positive");
	}
	const double beta = (target_g_last - 1.0) / last;
	std::vector<double> g;
	g.reserve(delta_t_days.size());
	for (double dt : delta_t_days) {
		g.push_back(1.0 + beta * dt);
	}
	return g;
}

std::vector<WeatherRow> perturb_future(std::span<const WeatherRow> rows, std::span<const double> delta_t_days,
                                       const PerturbationConfig &config, const NoiseSource &noise) {
	std::vector<WeatherRow> out(rows.begin(), rows.end());
	if (!config.enabled || rows.empty()) {
		return out;
	}
	if (rows.size() != delta_t_days.size()) {
		throw ShapeError("perturb_future: " + std::to_string(rows.size()) + " rows but " +
		                 std::to_string(delta_t_days.size()) + " offsets");
	}
	const auto g = horizon_scaling(delta_t_days, config.target_g_last);
	for (std::size_t k = 0; k < out.size(); ++k) {
		auto &row = out[k];
		for (auto &value : row.values) {
			value *= 1.0 + config.base_noise * g[k] * noise();
		}
		row[WeatherVariable::wind] = std::max(0.0, row[WeatherVariable::wind]);
		row[WeatherVariable::humidity] = std::clamp(row[WeatherVariable::humidity], 0.0, 100.0);
		row[WeatherVariable::radiation] = std::max(0.0, row[WeatherVariable::radiation]);
		row[WeatherVariable::rainfall] = std::max(0.0, row[WeatherVariable::rainfall]);
	}
	return out;
}

std::vector<WeatherRow> perturb_future(std::span<const WeatherRow> rows, std::span<const double> delta_t_days,
                                       const PerturbationConfig &config) {
	std::mt19937_64 rng(config.rng_seed);
	std::normal_distribution<double> normal(0.0, 1.0);
	return perturb_future(rows, delta_t_days, config, [&] { return normal(rng); });
}

} // namespace sqf::pipeline
