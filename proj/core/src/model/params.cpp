#include "sqf/model/params.hpp"

#include <cmath>
#include <random>

#include "sqf/core/seed.hpp"

namespace sqf::model {

namespace {

class Initializer {
public:
	explicit Initializer(std::uint64_t seed) : rng_(seed) {}

	Linear linear(std::size_t in, std::size_t out) {
		const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
		std::uniform_real_distribution<double> dist(-limit, limit);
		std::vector<double> w(in * out);
		for (auto &v : w) {
			v = dist(rng_);
		}
		return {Tensor::from({in, out}, std::move(w), true), Tensor::zeros({out}, true)};
	}

	static LayerNormParams norm(std::size_t d) { return {Tensor::full({d}, 1.0, true), Tensor::zeros({d}, true)}; }

	EncoderParams encoder(const ModelConfig &c) {
		EncoderParams enc;
		for (std::size_t l = 0; l < c.n_layers; ++l) {
			EncoderLayerParams layer;
			layer.norm1 = norm(c.d_model);
			layer.query = linear(c.d_model, c.d_model);
			layer.key = linear(c.d_model, c.d_model);
			layer.value = linear(c.d_model, c.d_model);
			layer.output = linear(c.d_model, c.d_model);
			layer.norm2 = norm(c.d_model);
			layer.ffn1 = linear(c.d_model, c.ffn_dim);
			layer.ffn2 = linear(c.ffn_dim, c.d_model);
			enc.layers.push_back(std::move(layer));
		}
		return enc;
	}

private:
	std::mt19937_64 rng_;
};

void append_linear(std::vector<NamedTensor> &out, const std::string &prefix, const Linear &l) {
	out.push_back({prefix + ".weight", l.weight});
	out.push_back({prefix + ".bias", l.bias});
}

void append_norm(std::vector<NamedTensor> &out, const std::string &prefix, const LayerNormParams &n) {
	out.push_back({prefix + ".gamma", n.gamma});
	out.push_back({prefix + ".beta", n.beta});
}

void append_encoder(std::vector<NamedTensor> &out, const std::string &prefix, const EncoderParams &enc) {
	for (std::size_t l = 0; l < enc.layers.size(); ++l) {
		const auto &layer = enc.layers[l];
		const std::string p = prefix + ".layer" + std::to_string(l);
		append_norm(out, p + ".norm1", layer.norm1);
		append_linear(out, p + ".query", layer.query);
		append_linear(out, p + ".key", layer.key);
		append_linear(out, p + ".value", layer.value);
		append_linear(out, p + ".output", layer.output);
		append_norm(out, p + ".norm2", layer.norm2);
		append_linear(out, p + ".ffn1", layer.ffn1);
		append_linear(out, p + ".ffn2", layer.ffn2);
	}
}

} // namespace

std::vector<NamedTensor> ModelParams::named() const {
	std::vector<NamedTensor> out;
	append_linear(out, "history.embedding", history_embedding);
	append_encoder(out, "history", history_encoder);
	if (future_embedding.weight.defined()) {
		append_linear(out, "future.embedding", future_embedding);
		append_encoder(out, "future", future_encoder);
	}
	if (future_constant.defined()) {
		out.push_back({"future.constant", future_constant});
	}
	append_linear(out, "head", head);
	return out;
}

ModelParams init_params(const ModelConfig &config, std::uint64_t seed) {
	config.validate();
	Initializer init(derive_seed(seed, "init", 0));
	ModelParams p;
	p.history_embedding = init.linear(config.history_width, config.d_model);
	p.history_encoder = init.encoder(config);
	if (config.use_future) {
		p.future_embedding = init.linear(config.future_width, config.d_model);
		p.future_encoder = init.encoder(config);
	} else {
		p.future_constant = Tensor::zeros({config.d_model}, true);
	}
	p.head = init.linear(2 * config.d_model, config.quantiles.size());
	return p;
}

ModelParams zero_params(const ModelConfig &config) {
	ModelParams p = init_params(config, 0);
	for (auto &named : p.named()) {
		auto values = named.tensor.mutableValues();
		std::fill(values.begin(), values.end(), 0.0);
	}
	return p;
}

std::size_t layer_parameter_count(const ModelConfig &c) {
	const std::size_t d = c.d_model;
	return 4 * (d * d + d) + 2 * (2 * d) + (d * c.ffn_dim + c.ffn_dim) + (c.ffn_dim * d + d);
}

std::size_t count_parameters(const ModelConfig &c) {
	const std::size_t d = c.d_model;
	std::size_t total = c.history_width * d + d + c.n_layers * layer_parameter_count(c);
	if (c.use_future) {
		total += c.future_width * d + d + c.n_layers * layer_parameter_count(c);
	} else {
		total += d;
	}
	total += 2 * d * c.quantiles.size() + c.quantiles.size();
	return total;
}

std::uint64_t estimate_flops(const ModelConfig &c, std::size_t batch, std::size_t history_length,
                             std::size_t future_length) {
	const std::uint64_t d = c.d_model;
	const std::uint64_t f = c.ffn_dim;
	auto encoder_macs = [&](std::uint64_t n) {
		const std::uint64_t projections = 4 * n * d * d;
		const std::uint64_t attention = 2 * n * n * d;
		const std::uint64_t ffn = 2 * n * d * f;
		return c.n_layers * (projections + attention + ffn);
	};
	std::uint64_t macs = history_length * c.history_width * d + encoder_macs(history_length);
	if (c.use_future) {
		macs += future_length * c.future_width * d + encoder_macs(future_length);
	}
	macs += c.horizon * 2 * d * c.quantiles.size();
	return 2 * macs * batch;
}

} // namespace sqf::model
