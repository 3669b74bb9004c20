#include "sqf/diff/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "sqf/core/error.hpp"

namespace sqf::diff {

namespace {
thread_local bool t_grad_enabled = true;
} // namespace

std::size_t element_count(const Shape &shape) {
	std::size_t n = 1;
	for (auto d : shape) {
		n *= d;
	}
	return n;
}

std::string to_string(const Shape &shape) {
	std::ostringstream os;
	os << '[';
	for (std::size_t i = 0; i < shape.size(); ++i) {
		os << (i ? ", " : "") << shape[i];
	}
	os << ']';
	return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
	const auto n = element_count(shape);
	return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
	if (element_count(shape) != values.size()) {
		throw ShapeError("tensor shape " + to_string(shape) + " holds " + std::to_string(element_count(shape)) +
		                 " values, got " + std::to_string(values.size()));
	}
	auto node = std::make_shared<Node>();
	node->shape = std::move(shape);
	node->value = std::move(values);
	node->requires_grad = requires_grad;
	return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({}, {value}, requires_grad); }

std::span<double> Tensor::mutableValues() {
	if (!node_->parents.empty()) {
		throw std::logic_error("mutableValues() on a non-leaf tensor");
	}
	return node_->value;
}

double Tensor::item() const {
	if (numel() != 1) {
		throw ShapeError("item() on tensor of shape " + to_string(shape()));
	}
	return node_->value[0];
}

void Tensor::setRequiresGrad(bool flag) { node_->requires_grad = flag; }

void Tensor::zeroGrad() {
	std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return from(node_->shape, node_->value, false); }

std::vector<Node *> topological_order(const Tensor &root) {
	std::vector<Node *> order;
	if (!root.defined()) {
		return order;
	}
	std::unordered_set<Node *> visited;
	// Iterative post-order DFS.
	std::vector<std::pair<Node *, std::size_t>> stack;
	stack.emplace_back(root.node(), 0);
	visited.insert(root.node());
	while (!stack.empty()) {
		auto &[node, next] = stack.back();
		if (next < node->parents.size()) {
			Node *parent = node->parents[next++].get();
			if (visited.insert(parent).second) {
				stack.emplace_back(parent, 0);
			}
		} else {
			order.push_back(node);
			stack.pop_back();
		}
	}
	return order;
}

void Tensor::backward() const {
	if (numel() != 1) {
		throw ShapeError("backward() requires a single-element tensor, got shape " + to_string(shape()));
	}
	if (!node_->requires_grad) {
		return;
	}
	const auto order = topological_order(*this);
	node_->ensureGrad()[0] += 1.0;
	for (auto it = order.rbegin(); it != order.rend(); ++it) {
		Node *node = *it;
		if (node->backward && !node->grad.empty()) {
			node->backward(*node);
		}
	}
}

bool grad_enabled() { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }

NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

Tensor make_result(Shape shape, std::vector<double> value, const std::vector<Tensor> &parents, const char *op,
                   std::function<void(Node &)> backward) {
	auto node = std::make_shared<Node>();
	node->shape = std::move(shape);
	node->value = std::move(value);
	node->op = op;
	bool needs = false;
	if (t_grad_enabled) {
		for (const auto &p : parents) {
			needs = needs || p.requiresGrad();
		}
	}
	if (needs) {
		node->requires_grad = true;
		node->parents.reserve(parents.size());
		for (const auto &p : parents) {
			node->parents.push_back(p.shared());
		}
		node->backward = std::move(backward);
	}
	return Tensor(std::move(node));
}

} // namespace sqf::diff
