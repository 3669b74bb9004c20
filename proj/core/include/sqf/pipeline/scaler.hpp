#pragma once

#include <span>
#include <string>
#include <vector>

#include "sqf/core/types.hpp"

namespace sqf::pipeline {

inline constexpr double kScalerEpsilon = 1e-8;

/// arcsinh((x - mu) / sqrt(sigma2 + eps)).
double apply_scaler(double x, const VariableScaler &params);

/// mu + sinh(x') * sqrt(sigma2 + eps).
double invert_scaler(double scaled, const VariableScaler &params);

/// Population mean and variance with compensated two-pass summation. Throws on empty input.
VariableScaler fit_variable(std::span<const double> values);

/// One scaler per named variable. `values[i]` holds every training value of `names[i]`.
ScalerParams fit_scaler(const std::vector<std::string> &names, const std::vector<std::vector<double>> &values);

} // namespace sqf::pipeline
