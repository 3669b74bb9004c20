#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sqf::diff {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape &shape);
std::string to_string(const Shape &shape);

/// Graph vertex. Values are immutable once an op has produced them; leaves (parameters,
/// inputs) may be edited in place between graph constructions.
struct Node {
	Shape shape;
	std::vector<double> value;
	std::vector<double> grad;
	bool requires_grad = false;
	const char *op = "leaf";
	std::vector<std::shared_ptr<Node>> parents;
	/// Propagates this node's grad into its parents' grads.
	std::function<void(Node &)> backward;

	std::span<double> ensureGrad() {
		if (grad.empty()) {
			grad.assign(value.size(), 0.0);
		}
		return grad;
	}
};

/// Shared handle to a graph node, rebuilt on every forward pass (define-by-run).
class Tensor {
public:
	Tensor() = default;

	static Tensor zeros(Shape shape, bool requires_grad = false);
	static Tensor full(Shape shape, double value, bool requires_grad = false);
	static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
	static Tensor scalar(double value, bool requires_grad = false);

	bool defined() const { return node_ != nullptr; }
	const Shape &shape() const { return node_->shape; }
	std::size_t rank() const { return node_->shape.size(); }
	std::size_t size(std::size_t axis) const { return node_->shape.at(axis); }
	std::size_t numel() const { return node_->value.size(); }

	std::span<const double> values() const { return node_->value; }
	/// In-place access for leaves, e.g. optimizer updates and finite differences.
	std::span<double> mutableValues();
	double item() const;
	double at(std::size_t flat_index) const { return node_->value[flat_index]; }

	bool requiresGrad() const { return node_->requires_grad; }
	void setRequiresGrad(bool flag);
	bool hasGrad() const { return !node_->grad.empty(); }
	/// Gradient, or an empty span before any backward pass reached this tensor.
	std::span<const double> grad() const { return node_->grad; }
	std::span<double> mutableGrad() { return node_->ensureGrad(); }
	void zeroGrad();

	const char *op() const { return node_->op; }

	/// Reverse pass from a single-element tensor; accumulates into every reachable leaf that
	/// requires grad.
	void backward() const;

	/// Leaf copy of the current value with no history.
	Tensor detach() const;

	Node *node() const { return node_.get(); }
	const std::shared_ptr<Node> &shared() const { return node_; }

	explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

private:
	std::shared_ptr<Node> node_;
};

/// Whether new ops record history on this thread.
bool grad_enabled();

/// Disables graph recording for the current thread within its scope.
class NoGradGuard {
public:
	NoGradGuard();
	~NoGradGuard();
	NoGradGuard(const NoGradGuard &) = delete;
	NoGradGuard &operator=(const NoGradGuard &) = delete;

private:
	bool previous_;
};

/// Creates an op result. When recording is enabled and any parent requires grad, the parents
/// and `backward` are retained; otherwise the result is a constant.
Tensor make_result(Shape shape, std::vector<double> value, const std::vector<Tensor> &parents, const char *op,
                   std::function<void(Node &)> backward);

/// Nodes reachable from `root`, parents before children.
std::vector<Node *> topological_order(const Tensor &root);

} // namespace sqf::diff
