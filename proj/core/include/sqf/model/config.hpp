#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "sqf/core/types.hpp"

namespace sqf::pipeline {
struct FeatureSchema;
}

namespace sqf::model {

/// Architecture and input switches of the dual-branch quantile network.
///
/// The four `use_*` switches zero input channels by feature role before embedding;
/// `use_future == false` replaces the selected future embeddings with a learned constant.
struct ModelConfig {
	std::size_t d_model = 128;
	/// Encoder layers per branch.
	std::size_t n_layers = 8;
	std::size_t n_heads = 8;
	std::size_t ffn_dim = 512;
	double dropout = 0.1;
	std::array<double, 3> quantiles = kQuantileLevels;

	std::size_t history_width = 22;
	std::size_t future_width = 21;
	std::size_t horizon = 3;
	std::vector<FeatureRole> history_roles;
	std::vector<FeatureRole> future_roles;

	bool use_future = true;
	bool use_history_covariates = true;
	bool use_target = true;
	bool use_feature_engineering = true;
	bool quantile_sort = false;

	/// Throws ConfigError on an inconsistent configuration.
	void validate() const;

	friend bool operator==(const ModelConfig &, const ModelConfig &) = default;
};

/// Copies token widths, roles and horizon from a feature schema.
ModelConfig config_for_schema(const pipeline::FeatureSchema &schema, ModelConfig base = {});

/// Per-channel keep flags (1 keep, 0 zero) implied by the input switches.
std::vector<double> history_channel_gate(const ModelConfig &config);
std::vector<double> future_channel_gate(const ModelConfig &config);

} // namespace sqf::model
