#include "sqf/train/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sqf/core/error.hpp"

namespace sqf::train {

namespace {

bool all_finite(std::span<const double> values) {
	return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void apply_adam(std::span<double> params, std::span<const double> grads, AdamState &state, double lr,
                const AdamConfig &c) {
	if (state.m.size() != params.size()) {
		state.m.assign(params.size(), 0.0);
		state.v.assign(params.size(), 0.0);
	}
	++state.t;
	const double t = static_cast<double>(state.t);
	const double bc1 = 1.0 - std::pow(c.beta1, t);
	const double bc2 = 1.0 - std::pow(c.beta2, t);
	for (std::size_t i = 0; i < params.size(); ++i) {
		const double g = grads.empty() ? 0.0 : grads[i];
		state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
		state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
		const double m_hat = state.m[i] / bc1;
		const double v_hat = state.v[i] / bc2;
		params[i] -= lr * m_hat / (std::sqrt(v_hat) + c.eps);
	}
}

} // namespace

void adam_step(std::span<double> params, std::span<const double> grads, AdamState &state, double lr,
               const AdamConfig &config) {
	if (!grads.empty() && grads.size() != params.size()) {
		throw ShapeError("adam_step: " + std::to_string(grads.size()) + " gradients for " +
		                 std::to_string(params.size()) + " parameters");
	}
	if (!all_finite(grads)) {
		throw NumericError("adam_step: non-finite gradient");
	}
	apply_adam(params, grads, state, lr, config);
}

Adam::Adam(std::vector<diff::Tensor> params, AdamConfig config)
    : params_(std::move(params)), state_(params_.size()), config_(config) {}

void Adam::step(double lr) {
	for (const auto &p : params_) {
		if (p.hasGrad() && !all_finite(p.grad())) {
			throw NumericError("adam: non-finite gradient in a parameter of shape " + diff::to_string(p.shape()));
		}
	}
	for (std::size_t i = 0; i < params_.size(); ++i) {
		apply_adam(params_[i].mutableValues(), params_[i].grad(), state_[i], lr, config_);
	}
	++steps_;
}

void Adam::zeroGrad() {
	for (auto &p : params_) {
		p.zeroGrad();
	}
}

PlateauScheduler::PlateauScheduler(double lr, PlateauConfig config)
    : lr_(lr), config_(config), best_(std::numeric_limits<double>::infinity()) {}

double PlateauScheduler::step(double val_loss) {
	if (val_loss < best_) {
		best_ = val_loss;
		bad_epochs_ = 0;
		return lr_;
	}
	++bad_epochs_;
	if (bad_epochs_ >= config_.patience) {
		lr_ = std::max(lr_ * config_.factor, std::min(config_.min_lr, lr_));
		bad_epochs_ = 0;
	}
	return lr_;
}

} // namespace sqf::train
