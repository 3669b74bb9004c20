#include "sqf/model/config.hpp"

#include <string>

#include "sqf/core/error.hpp"
#include "sqf/pipeline/schema.hpp"

namespace sqf::model {

namespace {

bool keep_channel(const ModelConfig &config, FeatureRole role) {
	switch (role) {
	case FeatureRole::target:
		return config.use_target;
	case FeatureRole::raw_weather:
		return true;
	case FeatureRole::engineered:
		return config.use_feature_engineering;
	case FeatureRole::cyclical:
		return true;
	}
	return true;
}

} // namespace

void ModelConfig::validate() const {
	auto fail = [](const std::string &field, const std::string &why) {
		throw ConfigError("model." + field + ": " + why);
	};
	if (d_model == 0) fail("d_model", "must be positive");
	if (n_heads == 0) fail("n_heads", "must be positive");
	if (d_model % n_heads != 0) {
		fail("n_heads", "d_model " + std::to_string(d_model) + " is not divisible by " + std::to_string(n_heads));
	}
	if (ffn_dim == 0) fail("ffn_dim", "must be positive");
	if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout", "must lie in [0, 1)");
	if (history_width == 0) fail("history_width", "must be positive");
	if (future_width == 0) fail("future_width", "must be positive");
	if (horizon == 0) fail("horizon", "must be positive");
	if (!history_roles.empty() && history_roles.size() != history_width) {
		fail("history_roles", "expected " + std::to_string(history_width) + " entries");
	}
	if (!future_roles.empty() && future_roles.size() != future_width) {
		fail("future_roles", "expected " + std::to_string(future_width) + " entries");
	}
	for (std::size_t i = 0; i < quantiles.size(); ++i) {
		if (!(quantiles[i] > 0.0 && quantiles[i] < 1.0) || (i > 0 && quantiles[i] <= quantiles[i - 1])) {
			fail("quantiles", "levels must be increasing inside (0, 1)");
		}
	}
}

ModelConfig config_for_schema(const pipeline::FeatureSchema &schema, ModelConfig base) {
	base.history_width = schema.historyWidth();
	base.future_width = schema.futureWidth();
	base.horizon = schema.horizon;
	base.history_roles = schema.historyRoles();
	base.future_roles = schema.futureRoles();
	return base;
}

std::vector<double> history_channel_gate(const ModelConfig &config) {
	std::vector<double> gate(config.history_width, 1.0);
	for (std::size_t c = 0; c < config.history_roles.size(); ++c) {
		const FeatureRole role = config.history_roles[c];
		bool keep = keep_channel(config, role);
		if (!config.use_history_covariates && (role == FeatureRole::raw_weather || role == FeatureRole::engineered)) {
			keep = false;
		}
		gate[c] = keep ? 1.0 : 0.0;
	}
	return gate;
}

std::vector<double> future_channel_gate(const ModelConfig &config) {
	std::vector<double> gate(config.future_width, 1.0);
	for (std::size_t c = 0; c < config.future_roles.size(); ++c) {
		gate[c] = keep_channel(config, config.future_roles[c]) ? 1.0 : 0.0;
	}
	return gate;
}

} // namespace sqf::model
