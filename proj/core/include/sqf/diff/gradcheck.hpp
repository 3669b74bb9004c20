#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sqf/diff/tensor.hpp"

namespace sqf::diff {

struct GradCheckOptions {
	double step = 1e-4;
	double tolerance = 1e-5;
	/// Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
	double floor = 1e-6;
	/// Check at most this many elements per input (0 = all), chosen by a seeded shuffle.
	std::size_t max_elements_per_input = 0;
	std::uint64_t seed = 0;
};

struct GradCheckReport {
	double max_relative_error = 0.0;
	double max_absolute_error = 0.0;
	std::size_t worst_input = 0;
	std::size_t worst_index = 0;
	double worst_analytic = 0.0;
	double worst_numeric = 0.0;
	std::size_t checked = 0;
	bool passed = true;
};

using ScalarFunction = std::function<Tensor(const std::vector<Tensor> &)>;

/// Compares the reverse-mode gradient of a scalar function against central differences.
/// Throws NumericError naming the offending op chain when a forward value is non-finite.
GradCheckReport check_gradients(const ScalarFunction &f, const std::vector<Tensor> &inputs,
                                const GradCheckOptions &options = {});

/// Op chain from the earliest non-finite node to `root`, or nullopt when all values are finite.
std::optional<std::string> find_non_finite(const Tensor &root);

} // namespace sqf::diff
