#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sqf/core/types.hpp"

namespace sqf::pipeline {

struct Feature {
	std::string name;
	FeatureRole role;

	friend bool operator==(const Feature &, const Feature &) = default;
};

inline constexpr std::size_t kEngineeredFeatures = 9;
inline constexpr std::size_t kCyclicalFeatures = 6;

inline constexpr std::array<const char *, kEngineeredFeatures> kEngineeredNames = {
    "rain_bt", "cold_bt", "hot_bt", "rain_roll7", "cold_roll7", "hot_roll7", "rain_roll14", "cold_roll14", "hot_roll14"};

inline constexpr std::array<const char *, kCyclicalFeatures> kCyclicalNames = {"doy_sin1", "doy_cos1", "doy_sin2",
                                                                              "doy_cos2", "doy_sin3", "doy_cos3"};

inline constexpr const char *kTargetName = "ndvi";

/// Column layout of history and future tokens.
///
/// History: ndvi, 6 raw weather, 9 engineered, 6 cyclical (22 columns).
/// Future: the same without ndvi (21 columns).
struct FeatureSchema {
	std::vector<Feature> history;
	std::vector<Feature> future;
	std::size_t history_length = 3;
	std::size_t horizon = 3;

	std::size_t historyWidth() const { return history.size(); }
	std::size_t futureWidth() const { return future.size(); }

	/// FNV-1a over feature names, roles, history length and horizon.
	std::uint64_t hash() const;

	std::vector<FeatureRole> historyRoles() const;
	std::vector<FeatureRole> futureRoles() const;

	/// Every distinct variable name, history order first.
	std::vector<std::string> variableNames() const;

	friend bool operator==(const FeatureSchema &, const FeatureSchema &) = default;
};

FeatureSchema default_schema(std::size_t history_length = 3, std::size_t horizon = 3);

std::string format_hash(std::uint64_t hash);

} // namespace sqf::pipeline
