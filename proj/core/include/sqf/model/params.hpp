#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqf/diff/tensor.hpp"
#include "sqf/model/config.hpp"

namespace sqf::model {

using diff::Tensor;

/// y = x·W + b with W stored as [in, out].
struct Linear {
	Tensor weight;
	Tensor bias;
};

struct LayerNormParams {
	Tensor gamma;
	Tensor beta;
};

struct EncoderLayerParams {
	LayerNormParams norm1;
	Linear query;
	Linear key;
	Linear value;
	Linear output;
	LayerNormParams norm2;
	Linear ffn1;
	Linear ffn2;
};

struct EncoderParams {
	std::vector<EncoderLayerParams> layers;
};

struct NamedTensor {
	std::string name;
	Tensor tensor;
};

struct ModelParams {
	Linear history_embedding;
	EncoderParams history_encoder;
	/// Future embedding and encoder exist only when the future branch is enabled.
	Linear future_embedding;
	EncoderParams future_encoder;
	/// Learned stand-in for the selected future embeddings when the future branch is disabled.
	Tensor future_constant;
	Linear head;

	/// Every trainable tensor in a fixed order with dotted names, e.g. "history.layer3.ffn1.weight".
	std::vector<NamedTensor> named() const;
};

/// Xavier-uniform weights, zero biases, unit layer-norm gains; deterministic in `seed`.
ModelParams init_params(const ModelConfig &config, std::uint64_t seed);

/// Zero-filled tensors with the layout of init_params.
ModelParams zero_params(const ModelConfig &config);

/// Trainable scalars per encoder layer.
std::size_t layer_parameter_count(const ModelConfig &config);

/// Exact trainable scalar count of init_params(config).
std::size_t count_parameters(const ModelConfig &config);

/// FLOPs of one inference forward pass, two per multiply-add, over all matmuls
/// (embeddings, projections, attention products, FFN, head).
std::uint64_t estimate_flops(const ModelConfig &config, std::size_t batch = 1, std::size_t history_length = 3,
                             std::size_t future_length = 15);

} // namespace sqf::model
