#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sqf/diff/tensor.hpp"

namespace sqf::train {

struct AdamConfig {
	double beta1 = 0.9;
	double beta2 = 0.999;
	double eps = 1e-8;
};

struct AdamState {
	std::vector<double> m;
	std::vector<double> v;
	std::size_t t = 0;
};

/// One bias-corrected Adam update in place. Throws NumericError, leaving params and state
/// untouched, when any gradient is non-finite.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState &state, double lr,
               const AdamConfig &config = {});

/// Adam over a fixed list of leaf tensors. Tensors that received no gradient are treated as
/// having a zero gradient.
class Adam {
public:
	explicit Adam(std::vector<diff::Tensor> params, AdamConfig config = {});

	/// Validates every gradient before touching any parameter.
	void step(double lr);
	void zeroGrad();

	std::size_t steps() const { return steps_; }
	const std::vector<AdamState> &state() const { return state_; }

private:
	std::vector<diff::Tensor> params_;
	std::vector<AdamState> state_;
	AdamConfig config_;
	std::size_t steps_ = 0;
};

struct PlateauConfig {
	double factor = 0.2;
	std::size_t patience = 20;
	double min_lr = 5e-5;
};

/// Reduce-on-plateau: after `patience` consecutive epochs without strict improvement of the
/// best validation loss, lr ← max(lr·factor, min_lr). The counter resets on improvement and
/// on every reduction.
class PlateauScheduler {
public:
	PlateauScheduler(double lr, PlateauConfig config = {});

	/// Records one epoch's validation loss and returns the learning rate for the next epoch.
	double step(double val_loss);

	double lr() const { return lr_; }
	double best() const { return best_; }
	std::size_t badEpochs() const { return bad_epochs_; }

private:
	double lr_;
	PlateauConfig config_;
	double best_;
	std::size_t bad_epochs_ = 0;
};

} // namespace sqf::train
