#include "sqf/pipeline/schema.hpp"

#include <cstdio>
#include <set>

#include "sqf/core/seed.hpp"

namespace sqf::pipeline {

namespace {

void append_covariates(std::vector<Feature> &out) {
	for (const char *name : kWeatherNames) {
		out.push_back({name, FeatureRole::raw_weather});
	}
	for (const char *name : kEngineeredNames) {
		out.push_back({name, FeatureRole::engineered});
	}
	for (const char *name : kCyclicalNames) {
		out.push_back({name, FeatureRole::cyclical});
	}
}

std::uint64_t hash_u64(std::uint64_t hash, std::uint64_t v) {
	for (int i = 0; i < 8; ++i) {
		hash ^= (v >> (8 * i)) & 0xffu;
		hash *= 0x100000001b3ULL;
	}
	return hash;
}

} // namespace

FeatureSchema default_schema(std::size_t history_length, std::size_t horizon) {
	FeatureSchema schema;
	schema.history_length = history_length;
	schema.horizon = horizon;
	schema.history.push_back({kTargetName, FeatureRole::target});
	append_covariates(schema.history);
	append_covariates(schema.future);
	return schema;
}

std::uint64_t FeatureSchema::hash() const {
	std::uint64_t h = fnv1a("sqf-schema");
	for (const auto *list : {&history, &future}) {
		h = hash_u64(h, list->size());
		for (const auto &f : *list) {
			h = fnv1a(f.name, h);
			h = hash_u64(h, static_cast<std::uint64_t>(f.role));
		}
	}
	h = hash_u64(h, history_length);
	h = hash_u64(h, horizon);
	return h;
}

std::vector<FeatureRole> FeatureSchema::historyRoles() const {
	std::vector<FeatureRole> out;
	for (const auto &f : history) {
		out.push_back(f.role);
	}
	return out;
}

std::vector<FeatureRole> FeatureSchema::futureRoles() const {
	std::vector<FeatureRole> out;
	for (const auto &f : future) {
		out.push_back(f.role);
	}
	return out;
}

std::vector<std::string> FeatureSchema::variableNames() const {
	std::vector<std::string> out;
	std::set<std::string> seen;
	for (const auto *list : {&history, &future}) {
		for (const auto &f : *list) {
			if (seen.insert(f.name).second) {
				out.push_back(f.name);
			}
		}
	}
	return out;
}

std::string format_hash(std::uint64_t hash) {
	char buf[24];
	std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
	return buf;
}

} // namespace sqf::pipeline
