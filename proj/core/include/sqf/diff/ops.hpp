#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sqf/diff/tensor.hpp"

namespace sqf::diff {

/// [..., M, K] x [K, N] (shared right operand) or [..., M, K] x [..., K, N] (equal batch dims).
Tensor matmul(const Tensor &a, const Tensor &b);

/// Elementwise with numpy-style broadcasting (shapes right-aligned; size-1 or missing dims broadcast).
Tensor add(const Tensor &a, const Tensor &b);
Tensor sub(const Tensor &a, const Tensor &b);
Tensor mul(const Tensor &a, const Tensor &b);

Tensor scale(const Tensor &x, double factor);
Tensor relu(const Tensor &x);

/// Softmax along the last axis.
Tensor softmax(const Tensor &x);

/// Normalizes over the last axis, then applies gamma/beta when defined.
Tensor layer_norm(const Tensor &x, const Tensor &gamma, const Tensor &beta, double eps = 1e-5);

/// Inverted dropout: kept entries are divided by (1 - p). Identity when p == 0 or not training.
Tensor dropout(const Tensor &x, double p, std::uint64_t seed, bool training = true);

Tensor concat(const std::vector<Tensor> &parts, std::size_t axis);

/// Reductions removing `axis`.
Tensor sum(const Tensor &x, std::size_t axis);
Tensor mean(const Tensor &x, std::size_t axis);
/// Sum of every element, shape {}.
Tensor sum_all(const Tensor &x);

/// Selects `k` entries along `axis` independently for every leading index.
/// `indices` holds prod(shape[0..axis)) * k entries, row-major over the leading dims.
Tensor gather(const Tensor &x, std::size_t axis, std::span<const std::size_t> indices, std::size_t k);

/// Replaces entries whose mask byte is non-zero with `value` (no gradient flows to them).
Tensor masked_fill(const Tensor &x, std::span<const std::uint8_t> mask, double value);

Tensor reshape(const Tensor &x, Shape shape);
Tensor permute(const Tensor &x, const std::vector<std::size_t> &axes);
/// Swaps the last two axes.
Tensor transpose(const Tensor &x);
Tensor broadcast_to(const Tensor &x, const Shape &shape);

} // namespace sqf::diff
