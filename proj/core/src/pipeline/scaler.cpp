#include "sqf/pipeline/scaler.hpp"

#include <cmath>

#include "sqf/core/error.hpp"
#include "sqf/core/numeric.hpp"

namespace sqf::pipeline {

double apply_scaler(double x, const VariableScaler &p) { return std::asinh((x - p.mu) / std::sqrt(p.sigma2 + p.eps)); }

double invert_scaler(double scaled, const VariableScaler &p) { return p.mu + std::sinh(scaled) * std::sqrt(p.sigma2 + p.eps); }

VariableScaler fit_variable(std::span<const double> values) {
	if (values.empty()) {
		throw InsufficientDataError("cannot fit a scaler on empty data");
	}
	const double n = static_cast<double>(values.size());
	const double mean = compensated_sum(values) / n;
	CompensatedSum sq;
	for (double v : values) {
		sq.add((v - mean) * (v - mean));
	}
	return {mean, sq.value() / n, kScalerEpsilon};
}

ScalerParams fit_scaler(const std::vector<std::string> &names, const std::vector<std::vector<double>> &values) {
	if (names.size() != values.size()) {
		throw ShapeError("fit_scaler: names and value lists differ in length");
	}
	ScalerParams out;
	for (std::size_t i = 0; i < names.size(); ++i) {
		if (values[i].empty()) {
			throw InsufficientDataError("cannot fit scaler for '" + names[i] + "': no training values");
		}
		out.names.push_back(names[i]);
		out.variables.push_back(fit_variable(values[i]));
	}
	return out;
}

} // namespace sqf::pipeline
