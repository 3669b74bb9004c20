#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sqf/core/types.hpp"

namespace sqf::pipeline {

struct PerturbationConfig {
	double base_noise = 0.1;
	double target_g_last = 2.0;
	std::uint64_t rng_seed = 0;
	bool enabled = true;

	void validate() const;
};

/// g_k = 1 + beta * dt_k with beta chosen so that the last factor equals target_g_last.
std::vector<double> horizon_scaling(std::span<const double> delta_t_days, double target_g_last);

/// Source of standard-normal draws, one per perturbed value.
using NoiseSource = std::function<double()>;

/// Multiplies every raw weather value of row k by (1 + base_noise * g_k * eps), eps ~ N(0, 1),
/// drawn from a generator seeded with `config.rng_seed`. Identity when disabled.
/// Physically bounded variables are clipped back to their range afterwards.
std::vector<WeatherRow> perturb_future(std::span<const WeatherRow> rows, std::span<const double> delta_t_days,
                                       const PerturbationConfig &config);

/// As above with an explicit noise source.
std::vector<WeatherRow> perturb_future(std::span<const WeatherRow> rows, std::span<const double> delta_t_days,
                                       const PerturbationConfig &config, const NoiseSource &noise);

} // namespace sqf::pipeline
