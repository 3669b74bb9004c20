#include "sqf/diff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "sqf/core/error.hpp"

namespace sqf::diff {

namespace {

double evaluate(const ScalarFunction &f, const std::vector<Tensor> &inputs) {
	NoGradGuard guard;
	Tensor out = f(inputs);
	if (auto chain = find_non_finite(out)) {
		throw NumericError("non-finite value during gradient check: " + *chain);
	}
	return out.item();
}

} // namespace

GradCheckReport check_gradients(const ScalarFunction &f, const std::vector<Tensor> &inputs,
                                const GradCheckOptions &options) {
	std::vector<Tensor> leaves = inputs;
	for (auto &t : leaves) {
		t.setRequiresGrad(true);
		t.zeroGrad();
	}
	Tensor out = f(leaves);
	if (auto chain = find_non_finite(out)) {
		throw NumericError("non-finite value during gradient check: " + *chain);
	}
	out.backward();

	GradCheckReport report;
	std::mt19937_64 rng(options.seed);
	for (std::size_t i = 0; i < leaves.size(); ++i) {
		Tensor &t = leaves[i];
		std::vector<double> analytic(t.numel(), 0.0);
		if (t.hasGrad()) {
			std::copy(t.grad().begin(), t.grad().end(), analytic.begin());
		}
		std::vector<std::size_t> order(t.numel());
		std::iota(order.begin(), order.end(), 0);
		if (options.max_elements_per_input > 0 && order.size() > options.max_elements_per_input) {
			std::shuffle(order.begin(), order.end(), rng);
			order.resize(options.max_elements_per_input);
		}
		auto values = t.mutableValues();
		for (std::size_t idx : order) {
			const double original = values[idx];
			values[idx] = original + options.step;
			const double plus = evaluate(f, leaves);
			values[idx] = original - options.step;
			const double minus = evaluate(f, leaves);
			values[idx] = original;
			const double numeric = (plus - minus) / (2.0 * options.step);
			const double a = analytic[idx];
			const double abs_err = std::abs(a - numeric);
			const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), options.floor});
			++report.checked;
			report.max_absolute_error = std::max(report.max_absolute_error, abs_err);
			if (rel > report.max_relative_error || report.checked == 1) {
				report.max_relative_error = std::max(report.max_relative_error, rel);
				report.worst_input = i;
				report.worst_index = idx;
				report.worst_analytic = a;
				report.worst_numeric = numeric;
			}
		}
	}
	report.passed = report.max_relative_error <= options.tolerance;
	return report;
}

std::optional<std::string> find_non_finite(const Tensor &root) {
	if (!root.defined()) {
		return std::nullopt;
	}
	const auto order = topological_order(root);
	Node *bad = nullptr;
	for (Node *n : order) {
		if (std::any_of(n->value.begin(), n->value.end(), [](double v) { return !std::isfinite(v); })) {
			bad = n;
			break;
		}
	}
	if (bad == nullptr) {
		return std::nullopt;
	}
	std::unordered_map<const Node *, bool> reaches;
	for (Node *n : order) {
		bool r = n == bad;
		for (const auto &p : n->parents) {
			r = r || reaches[p.get()];
		}
		reaches[n] = r;
	}
	std::vector<const char *> chain;
	const Node *cur = root.node();
	while (cur != nullptr) {
		chain.push_back(cur->op);
		if (cur == bad) {
			break;
		}
		const Node *next = nullptr;
		for (const auto &p : cur->parents) {
			if (reaches[p.get()]) {
				next = p.get();
				break;
			}
		}
		cur = next;
	}
	std::string text;
	for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
		if (!text.empty()) {
			text += " -> ";
		}
		text += *it;
	}
	return text;
}

} // namespace sqf::diff
