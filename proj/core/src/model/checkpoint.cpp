#include "sqf/model/checkpoint.hpp"

#include <algorithm>
#include <fstream>

#include "sqf/core/binary_io.hpp"
#include "sqf/core/error.hpp"

namespace sqf::model {

namespace {

constexpr std::uint32_t kVersion = 1;

std::uint8_t pack_flags(const ModelConfig &c) {
	return static_cast<std::uint8_t>((c.use_future ? 1 : 0) | (c.use_history_covariates ? 2 : 0) |
	                                 (c.use_target ? 4 : 0) | (c.use_feature_engineering ? 8 : 0) |
	                                 (c.quantile_sort ? 16 : 0));
}

void write_roles(binary::Writer &w, const std::vector<FeatureRole> &roles) {
	w.u32(static_cast<std::uint32_t>(roles.size()));
	for (auto r : roles) {
		w.u8(static_cast<std::uint8_t>(r));
	}
}

std::vector<FeatureRole> read_roles(binary::Reader &r) {
	const auto n = r.u32();
	if (n > 4096) {
		throw InputFormatError(r.context() + ": implausible role count " + std::to_string(n));
	}
	std::vector<FeatureRole> roles(n);
	for (auto &role : roles) {
		const auto v = r.u8();
		if (v > static_cast<std::uint8_t>(FeatureRole::cyclical)) {
			throw InputFormatError(r.context() + ": unknown feature role " + std::to_string(v));
		}
		role = static_cast<FeatureRole>(v);
	}
	return roles;
}

} // namespace

void write_checkpoint(std::ostream &out, const Checkpoint &ck) {
	binary::Writer w(out);
	w.bytes("SQFM", 4);
	w.u32(kVersion);
	const auto &c = ck.config;
	w.u64(c.d_model);
	w.u64(c.n_layers);
	w.u64(c.n_heads);
	w.u64(c.ffn_dim);
	w.f64(c.dropout);
	w.u32(static_cast<std::uint32_t>(c.quantiles.size()));
	for (double q : c.quantiles) {
		w.f64(q);
	}
	w.u64(c.history_width);
	w.u64(c.future_width);
	w.u64(c.horizon);
	write_roles(w, c.history_roles);
	write_roles(w, c.future_roles);
	w.u8(pack_flags(c));
	w.u64(ck.schema_hash);

	w.u32(static_cast<std::uint32_t>(ck.scaler.size()));
	for (std::size_t i = 0; i < ck.scaler.size(); ++i) {
		w.string(ck.scaler.names[i]);
		w.f64(ck.scaler.variables[i].mu);
		w.f64(ck.scaler.variables[i].sigma2);
		w.f64(ck.scaler.variables[i].eps);
	}

	const auto named = ck.params.named();
	w.u32(static_cast<std::uint32_t>(named.size()));
	for (const auto &p : named) {
		w.string(p.name);
		w.u32(static_cast<std::uint32_t>(p.tensor.rank()));
		for (auto d : p.tensor.shape()) {
			w.u64(d);
		}
		for (double v : p.tensor.values()) {
			w.f64(v);
		}
	}
	if (!out) {
		throw Error("failed writing checkpoint");
	}
}

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &checkpoint) {
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw Error("cannot open '" + path.string() + "' for writing");
	}
	write_checkpoint(out, checkpoint);
}

Checkpoint read_checkpoint(std::istream &in, const std::string &context) {
	binary::Reader r(in, context);
	r.expect_magic("SQFM");
	const auto version = r.u32();
	if (version != kVersion) {
		throw InputFormatError(context + ": unsupported checkpoint version " + std::to_string(version));
	}
	Checkpoint ck;
	auto &c = ck.config;
	c.d_model = r.u64();
	c.n_layers = r.u64();
	c.n_heads = r.u64();
	c.ffn_dim = r.u64();
	c.dropout = r.f64();
	const auto q = r.u32();
	if (q != c.quantiles.size()) {
		throw InputFormatError(context + ": expected " + std::to_string(c.quantiles.size()) + " quantile levels, got " +
		                       std::to_string(q));
	}
	for (auto &level : c.quantiles) {
		level = r.f64();
	}
	c.history_width = r.u64();
	c.future_width = r.u64();
	c.horizon = r.u64();
	c.history_roles = read_roles(r);
	c.future_roles = read_roles(r);
	const auto flags = r.u8();
	c.use_future = flags & 1;
	c.use_history_covariates = flags & 2;
	c.use_target = flags & 4;
	c.use_feature_engineering = flags & 8;
	c.quantile_sort = flags & 16;
	try {
		c.validate();
	} catch (const ConfigError &e) {
		throw InputFormatError(context + ": invalid model config: " + e.what());
	}
	ck.schema_hash = r.u64();

	const auto n_scaler = r.u32();
	for (std::uint32_t i = 0; i < n_scaler; ++i) {
		ck.scaler.names.push_back(r.string());
		VariableScaler v;
		v.mu = r.f64();
		v.sigma2 = r.f64();
		v.eps = r.f64();
		ck.scaler.variables.push_back(v);
	}

	ck.params = zero_params(c);
	const auto expected = ck.params.named();
	const auto n_params = r.u32();
	if (n_params != expected.size()) {
		throw InputFormatError(context + ": expected " + std::to_string(expected.size()) + " parameter tensors, got " +
		                       std::to_string(n_params));
	}
	for (auto slot : expected) {
		const std::string name = r.string();
		if (name != slot.name) {
			throw InputFormatError(context + ": expected parameter '" + slot.name + "', got '" + name + "'");
		}
		const auto rank = r.u32();
		diff::Shape shape(rank);
		for (auto &d : shape) {
			d = r.u64();
		}
		if (shape != slot.tensor.shape()) {
			throw InputFormatError(context + ": parameter '" + name + "' has shape " + diff::to_string(shape) +
			                       ", expected " + diff::to_string(slot.tensor.shape()));
		}
		auto values = slot.tensor.mutableValues();
		const auto data = r.f64s(values.size());
		std::copy(data.begin(), data.end(), values.begin());
	}
	return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw InputFormatError("cannot open checkpoint '" + path.string() + "'");
	}
	return read_checkpoint(in, path.string());
}

ModelParams clone_params(const ModelConfig &config, const ModelParams &params) {
	ModelParams copy = zero_params(config);
	copy_param_values(params, copy);
	return copy;
}

void copy_param_values(const ModelParams &from, ModelParams &to) {
	const auto src = from.named();
	auto dst = to.named();
	if (src.size() != dst.size()) {
		throw ShapeError("copy_param_values: parameter sets differ in size");
	}
	for (std::size_t i = 0; i < src.size(); ++i) {
		if (src[i].name != dst[i].name || src[i].tensor.shape() != dst[i].tensor.shape()) {
			throw ShapeError("copy_param_values: mismatch at '" + src[i].name + "'");
		}
		auto values = dst[i].tensor.mutableValues();
		std::copy(src[i].tensor.values().begin(), src[i].tensor.values().end(), values.begin());
	}
}

} // namespace sqf::model
