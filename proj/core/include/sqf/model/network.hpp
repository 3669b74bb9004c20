#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sqf/core/types.hpp"
#include "sqf/model/params.hpp"

namespace sqf::model {

/// Padded mini-batch. Future sequences are padded to the longest in the batch with
/// `future_mask` false on padding.
struct Batch {
	std::size_t size = 0;
	std::size_t history_length = 0;
	std::size_t future_length = 0;
	std::size_t horizon = 0;
	Tensor history_tokens; ///< [B, P, F_h]
	Tensor future_tokens;  ///< [B, L, F_f]
	Mask history_mask;     ///< B·P, 1 = valid
	Mask future_mask;      ///< B·L
	std::vector<std::size_t> selection; ///< B·h, indices into the future axis
};

/// Throws ShapeError when samples disagree on history length, horizon or token widths.
Batch make_batch(std::span<const ForecastSample> samples, std::span<const std::size_t> indices);
Batch make_batch(std::span<const ForecastSample> samples);

/// Dropout switch and seed source for one forward pass.
class ForwardContext {
public:
	ForwardContext() = default;
	ForwardContext(bool training, std::uint64_t seed) : training_(training), seed_(seed) {}

	bool training() const { return training_; }
	/// Distinct seed for each dropout site, in call order.
	std::uint64_t nextSeed();

private:
	bool training_ = false;
	std::uint64_t seed_ = 0;
	std::uint64_t counter_ = 0;
};

/// Fixed sinusoidal encoding, [length, d_model].
Tensor positional_encoding(std::size_t length, std::size_t d_model);

/// tokens [B, n, F] → tokens·W + b + PE, [B, n, d_model].
Tensor embed_and_position(const Tensor &tokens, const Linear &embedding);

Tensor linear(const Tensor &x, const Linear &l);

/// Pre-norm multi-head self-attention; keys with mask 0 receive zero weight.
Tensor self_attention(const Tensor &x, const Mask &mask, const EncoderLayerParams &layer, std::size_t n_heads);

/// Stack of pre-norm blocks x + Drop(MHA(LN x)), x + Drop(FFN(LN x)).
/// Throws DegenerateInputError when a sequence has no valid position.
Tensor encode(const Tensor &embedded, const Mask &mask, const EncoderParams &params, const ModelConfig &config,
              ForwardContext &ctx);

/// Mean over valid positions, [B, n, d] → [B, d].
Tensor pool_history(const Tensor &encoded, const Mask &mask);

/// Gathers h rows per batch element, [B, L, d] → [B, h, d].
Tensor select_future(const Tensor &encoded, std::span<const std::size_t> selection, std::size_t horizon);

/// (pooled ‖ selected_k) · W + b for every step, [B, d] × [B, h, d] → [B, h, Q].
Tensor quantile_head(const Tensor &pooled, const Tensor &selected, const Linear &head);

/// Full network; output [B, h, Q] in scaled target units.
Tensor forward(const ModelParams &params, const ModelConfig &config, const Batch &batch, ForwardContext &ctx);

/// Sorts every row of a [*, Q] array ascending.
void sort_quantiles(std::span<double> values, std::size_t levels);

/// Inference-mode predictions in scaled units, one per sample, sorted when config.quantile_sort.
/// Batches are processed on up to `threads` threads; output order follows the input.
std::vector<QuantilePrediction> predict(const ModelParams &params, const ModelConfig &config,
                                        std::span<const ForecastSample> samples, std::size_t batch_size = 256,
                                        std::size_t threads = 1);

} // namespace sqf::model
