#include "sqf/model/network.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "sqf/core/error.hpp"
#include "sqf/core/seed.hpp"
#include "sqf/diff/ops.hpp"

namespace sqf::model {

using namespace sqf::diff;

Batch make_batch(std::span<const ForecastSample> samples, std::span<const std::size_t> indices) {
	if (indices.empty()) {
		throw ShapeError("make_batch: empty batch");
	}
	const ForecastSample &first = samples[indices[0]];
	Batch b;
	b.size = indices.size();
	b.history_length = first.historyLength();
	b.horizon = first.horizon();
	const std::size_t fh = first.history_tokens.cols;
	const std::size_t ff = first.future_tokens.cols;
	for (std::size_t i : indices) {
		const auto &s = samples[i];
		if (s.historyLength() != b.history_length || s.horizon() != b.horizon || s.history_tokens.cols != fh ||
		    s.future_tokens.cols != ff) {
			throw ShapeError("make_batch: sample '" + s.cube_id + "' does not match the batch layout");
		}
		b.future_length = std::max(b.future_length, s.futureLength());
	}
	const std::size_t B = b.size;
	const std::size_t P = b.history_length;
	const std::size_t L = b.future_length;
	std::vector<double> hist(B * P * fh, 0.0);
	std::vector<double> fut(B * L * ff, 0.0);
	b.history_mask.assign(B * P, 0);
	b.future_mask.assign(B * L, 0);
	b.selection.resize(B * b.horizon);
	for (std::size_t r = 0; r < B; ++r) {
		const auto &s = samples[indices[r]];
		std::copy(s.history_tokens.data.begin(), s.history_tokens.data.end(), hist.begin() + r * P * fh);
		std::copy(s.future_tokens.data.begin(), s.future_tokens.data.end(), fut.begin() + r * L * ff);
		std::copy(s.history_mask.begin(), s.history_mask.end(), b.history_mask.begin() + r * P);
		std::copy(s.future_mask.begin(), s.future_mask.end(), b.future_mask.begin() + r * L);
		std::copy(s.selection_indices.begin(), s.selection_indices.end(), b.selection.begin() + r * b.horizon);
	}
	b.history_tokens = Tensor::from({B, P, fh}, std::move(hist));
	b.future_tokens = Tensor::from({B, L, ff}, std::move(fut));
	return b;
}

Batch make_batch(std::span<const ForecastSample> samples) {
	std::vector<std::size_t> all(samples.size());
	for (std::size_t i = 0; i < all.size(); ++i) {
		all[i] = i;
	}
	return make_batch(samples, all);
}

std::uint64_t ForwardContext::nextSeed() { return derive_seed(seed_, "dropout", counter_++); }

Tensor positional_encoding(std::size_t length, std::size_t d_model) {
	std::vector<double> pe(length * d_model);
	for (std::size_t pos = 0; pos < length; ++pos) {
		for (std::size_t i = 0; i < d_model; ++i) {
			const double exponent = static_cast<double>(i - i % 2) / static_cast<double>(d_model);
			const double angle = static_cast<double>(pos) / std::pow(10000.0, exponent);
			pe[pos * d_model + i] = i % 2 == 0 ? std::sin(angle) : std::cos(angle);
		}
	}
	return Tensor::from({length, d_model}, std::move(pe));
}

Tensor linear(const Tensor &x, const Linear &l) { return add(matmul(x, l.weight), l.bias); }

Tensor embed_and_position(const Tensor &tokens, const Linear &embedding) {
	if (tokens.rank() != 3 || tokens.size(2) != embedding.weight.size(0)) {
		throw ShapeError("embed_and_position: tokens " + to_string(tokens.shape()) + " do not fit embedding " +
		                 to_string(embedding.weight.shape()));
	}
	const std::size_t d = embedding.weight.size(1);
	return add(linear(tokens, embedding), positional_encoding(tokens.size(1), d));
}

Tensor self_attention(const Tensor &x, const Mask &mask, const EncoderLayerParams &layer, std::size_t n_heads) {
	const std::size_t B = x.size(0);
	const std::size_t n = x.size(1);
	const std::size_t d = x.size(2);
	const std::size_t dk = d / n_heads;
	auto split_heads = [&](const Tensor &t) { return permute(reshape(t, {B, n, n_heads, dk}), {0, 2, 1, 3}); };
	const Tensor q = split_heads(linear(x, layer.query));
	const Tensor k = split_heads(linear(x, layer.key));
	const Tensor v = split_heads(linear(x, layer.value));
	Tensor scores = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(static_cast<double>(dk)));

	if (std::find(mask.begin(), mask.end(), 0) != mask.end()) {
		Mask fill(B * n_heads * n * n, 0);
		for (std::size_t b = 0; b < B; ++b) {
			for (std::size_t h = 0; h < n_heads; ++h) {
				for (std::size_t i = 0; i < n; ++i) {
					std::uint8_t *row = fill.data() + ((b * n_heads + h) * n + i) * n;
					for (std::size_t j = 0; j < n; ++j) {
						row[j] = mask[b * n + j] ? 0 : 1;
					}
				}
			}
		}
		scores = masked_fill(scores, fill, -1e9);
	}
	const Tensor attn = softmax(scores);
	const Tensor context = reshape(permute(matmul(attn, v), {0, 2, 1, 3}), {B, n, d});
	return linear(context, layer.output);
}

Tensor encode(const Tensor &embedded, const Mask &mask, const EncoderParams &params, const ModelConfig &config,
              ForwardContext &ctx) {
	if (embedded.rank() != 3) {
		throw ShapeError("encode expects [B, n, d], got " + to_string(embedded.shape()));
	}
	const std::size_t B = embedded.size(0);
	const std::size_t n = embedded.size(1);
	if (mask.size() != B * n) {
		throw ShapeError("encode: mask of " + std::to_string(mask.size()) + " entries for sequence shape " +
		                 to_string(embedded.shape()));
	}
	for (std::size_t b = 0; b < B; ++b) {
		if (std::none_of(mask.begin() + b * n, mask.begin() + (b + 1) * n, [](std::uint8_t m) { return m != 0; })) {
			throw DegenerateInputError("encode: sequence " + std::to_string(b) + " has no unmasked position");
		}
	}
	const double p = config.dropout;
	Tensor x = embedded;
	for (const auto &layer : params.layers) {
		Tensor h = layer_norm(x, layer.norm1.gamma, layer.norm1.beta);
		x = add(x, dropout(self_attention(h, mask, layer, config.n_heads), p, ctx.nextSeed(), ctx.training()));
		h = layer_norm(x, layer.norm2.gamma, layer.norm2.beta);
		Tensor f = dropout(relu(linear(h, layer.ffn1)), p, ctx.nextSeed(), ctx.training());
		x = add(x, dropout(linear(f, layer.ffn2), p, ctx.nextSeed(), ctx.training()));
	}
	return x;
}

Tensor pool_history(const Tensor &encoded, const Mask &mask) {
	const std::size_t B = encoded.size(0);
	const std::size_t n = encoded.size(1);
	if (mask.size() != B * n) {
		throw ShapeError("pool_history: mask of " + std::to_string(mask.size()) + " entries for shape " +
		                 to_string(encoded.shape()));
	}
	std::vector<double> weights(B * n, 0.0);
	for (std::size_t b = 0; b < B; ++b) {
		const auto count = std::count_if(mask.begin() + b * n, mask.begin() + (b + 1) * n,
		                                 [](std::uint8_t m) { return m != 0; });
		if (count == 0) {
			throw DegenerateInputError("pool_history: sequence " + std::to_string(b) + " has no unmasked position");
		}
		for (std::size_t i = 0; i < n; ++i) {
			weights[b * n + i] = mask[b * n + i] ? 1.0 / static_cast<double>(count) : 0.0;
		}
	}
	return sum(mul(encoded, Tensor::from({B, n, 1}, std::move(weights))), 1);
}

Tensor select_future(const Tensor &encoded, std::span<const std::size_t> selection, std::size_t horizon) {
	return gather(encoded, 1, selection, horizon);
}

Tensor quantile_head(const Tensor &pooled, const Tensor &selected, const Linear &head) {
	if (pooled.rank() != 2 || selected.rank() != 3 || pooled.size(0) != selected.size(0) ||
	    pooled.size(1) != selected.size(2)) {
		throw ShapeError("quantile_head: pooled " + to_string(pooled.shape()) + " and selected " +
		                 to_string(selected.shape()) + " do not align");
	}
	const std::size_t B = pooled.size(0);
	const std::size_t d = pooled.size(1);
	const std::size_t h = selected.size(1);
	const Tensor repeated = broadcast_to(reshape(pooled, {B, 1, d}), {B, h, d});
	return linear(concat({repeated, selected}, 2), head);
}

namespace {

Tensor gate_channels(const Tensor &tokens, const std::vector<double> &gate) {
	if (std::all_of(gate.begin(), gate.end(), [](double g) { return g == 1.0; })) {
		return tokens;
	}
	return mul(tokens, Tensor::from({gate.size()}, gate));
}

} // namespace

Tensor forward(const ModelParams &params, const ModelConfig &config, const Batch &batch, ForwardContext &ctx) {
	const Tensor history = gate_channels(batch.history_tokens, history_channel_gate(config));
	const Tensor encoded_history =
	    encode(embed_and_position(history, params.history_embedding), batch.history_mask, params.history_encoder,
	           config, ctx);
	const Tensor pooled = pool_history(encoded_history, batch.history_mask);

	Tensor selected;
	if (config.use_future) {
		const Tensor future = gate_channels(batch.future_tokens, future_channel_gate(config));
		const Tensor encoded_future = encode(embed_and_position(future, params.future_embedding), batch.future_mask,
		                                     params.future_encoder, config, ctx);
		selected = select_future(encoded_future, batch.selection, batch.horizon);
	} else {
		selected = broadcast_to(params.future_constant, {batch.size, batch.horizon, config.d_model});
	}
	return quantile_head(pooled, selected, params.head);
}

void sort_quantiles(std::span<double> values, std::size_t levels) {
	for (std::size_t r = 0; r + levels <= values.size(); r += levels) {
		std::sort(values.begin() + static_cast<std::ptrdiff_t>(r),
		          values.begin() + static_cast<std::ptrdiff_t>(r + levels));
	}
}

std::vector<QuantilePrediction> predict(const ModelParams &params, const ModelConfig &config,
                                        std::span<const ForecastSample> samples, std::size_t batch_size,
                                        std::size_t threads) {
	std::vector<QuantilePrediction> out(samples.size());
	if (samples.empty()) {
		return out;
	}
	batch_size = std::max<std::size_t>(batch_size, 1);
	const std::size_t n_batches = (samples.size() + batch_size - 1) / batch_size;
	const std::size_t levels = config.quantiles.size();

	auto run_batch = [&](std::size_t bi) {
		NoGradGuard guard;
		const std::size_t begin = bi * batch_size;
		const std::size_t end = std::min(samples.size(), begin + batch_size);
		const Batch batch = make_batch(samples.subspan(begin, end - begin));
		ForwardContext ctx;
		const Tensor y = forward(params, config, batch, ctx);
		const auto values = y.values();
		const std::size_t per = batch.horizon * levels;
		for (std::size_t r = 0; r < batch.size; ++r) {
			QuantilePrediction pred;
			pred.values.rows = batch.horizon;
			pred.values.cols = levels;
			pred.values.data.assign(values.begin() + static_cast<std::ptrdiff_t>(r * per),
			                        values.begin() + static_cast<std::ptrdiff_t>((r + 1) * per));
			if (config.quantile_sort) {
				sort_quantiles(pred.values.data, levels);
			}
			out[begin + r] = std::move(pred);
		}
	};

	threads = std::clamp<std::size_t>(threads, 1, n_batches);
	if (threads == 1) {
		for (std::size_t bi = 0; bi < n_batches; ++bi) {
			run_batch(bi);
		}
		return out;
	}
	std::vector<std::thread> pool;
	std::vector<std::exception_ptr> errors(threads);
	for (std::size_t t = 0; t < threads; ++t) {
		pool.emplace_back([&, t] {
			try {
				for (std::size_t bi = t; bi < n_batches; bi += threads) {
					run_batch(bi);
				}
			} catch (...) {
				errors[t] = std::current_exception();
			}
		});
	}
	for (auto &th : pool) {
		th.join();
	}
	for (auto &e : errors) {
		if (e) {
			std::rethrow_exception(e);
		}
	}
	return out;
}

} // namespace sqf::model
