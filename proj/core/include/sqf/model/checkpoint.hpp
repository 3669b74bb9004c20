#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "sqf/core/types.hpp"
#include "sqf/model/params.hpp"

namespace sqf::model {

/// Self-describing model file.
///
/// Layout (little-endian):
///   "SQFM", u32 version = 1
///   config:  u64 d_model, n_layers, n_heads, ffn_dim; f64 dropout; u32 Q, Q×f64 quantiles;
///            u64 history_width, future_width, horizon;
///            u32 n, n×u8 history roles; u32 n, n×u8 future roles;
///            u8 flags (bit0 use_future, bit1 use_history_covariates, bit2 use_target,
///                      bit3 use_feature_engineering, bit4 quantile_sort)
///   u64 schema hash
///   scaler:  u32 n, n × (string name, f64 mu, f64 sigma2, f64 eps)
///   params:  u32 n, n × (string name, u32 rank, rank×u64 dims, f64 values row-major)
/// Strings are u32 length + bytes.
struct Checkpoint {
	ModelConfig config;
	std::uint64_t schema_hash = 0;
	ScalerParams scaler;
	ModelParams params;
};

void write_checkpoint(std::ostream &out, const Checkpoint &checkpoint);
void save_checkpoint(const std::filesystem::path &path, const Checkpoint &checkpoint);

/// Throws InputFormatError on a malformed file or a parameter set that does not match the config.
Checkpoint read_checkpoint(std::istream &in, const std::string &context = "checkpoint");
Checkpoint load_checkpoint(const std::filesystem::path &path);

/// Deep copy of parameter values (fresh leaves).
ModelParams clone_params(const ModelConfig &config, const ModelParams &params);

/// Copies values of `from` into the leaves of `to`; layouts must match.
void copy_param_values(const ModelParams &from, ModelParams &to);

} // namespace sqf::model
