#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "sqf/core/error.hpp"
#include "sqf/diff/gradcheck.hpp"
#include "sqf/diff/ops.hpp"
#include "test_support.hpp"

using namespace sqf;
using namespace sqf::diff;

namespace {

Tensor random_tensor(testing::Rng &rng, Shape shape, bool grad = true) {
	std::normal_distribution<double> normal(0.0, 1.0);
	std::size_t n = 1;
	for (auto s : shape) {
		n *= s;
	}
	std::vector<double> v(n);
	for (auto &x : v) {
		x = normal(rng);
	}
	return Tensor::from(std::move(shape), std::move(v), grad);
}

/// Weighted sum so every output element gets a distinct upstream gradient.
Tensor probe(const Tensor &y, std::uint64_t seed) {
	// Offset so the weights never coincide with inputs drawn from the same seed.
	testing::Rng rng(seed + 0x9e3779b97f4a7c15ULL);
	auto w = random_tensor(rng, y.shape(), false);
	return sum_all(mul(y, w));
}

GradCheckReport check(const std::function<Tensor(const std::vector<Tensor> &)> &f, const std::vector<Tensor> &in) {
	GradCheckOptions opt;
	opt.step = 1e-5;
	opt.tolerance = 1e-4;
	return check_gradients(f, in, opt);
}

} // namespace

TEST_CASE("softmax and layer norm examples") {
	const auto s = softmax(Tensor::from({2}, {0.0, 0.0}));
	CHECK(s.at(0) == 0.5);
	CHECK(s.at(1) == 0.5);
	const auto ln = layer_norm(Tensor::from({1, 4}, {3.0, 3.0, 3.0, 3.0}), Tensor(), Tensor());
	for (double v : ln.values()) {
		CHECK(v == 0.0);
	}
	const auto big = softmax(Tensor::from({3}, {1000.0, 1000.0, -1000.0}));
	CHECK(big.at(0) == doctest::Approx(0.5));
	CHECK(big.at(2) == 0.0);
}

TEST_CASE("linear and quadratic gradients") {
	auto x = Tensor::from({2}, {1.0, 2.0}, true);
	sum_all(x).backward();
	CHECK(x.grad()[0] == 1.0);
	CHECK(x.grad()[1] == 1.0);
	x.zeroGrad();
	sum_all(mul(x, x)).backward();
	CHECK(x.grad()[0] == 2.0);
	CHECK(x.grad()[1] == 4.0);
}

TEST_CASE("matmul gradient against central differences") {
	testing::Rng rng(1);
	auto a = random_tensor(rng, {3, 4});
	auto b = random_tensor(rng, {4, 2});
	GradCheckOptions opt;
	opt.step = 1e-4;
	opt.tolerance = 1e-5;
	const auto r = check_gradients([](const auto &in) { return probe(matmul(in[0], in[1]), 9); }, {a, b}, opt);
	CHECK(r.passed);
	CHECK(r.max_relative_error < 1e-5);
	CHECK(r.checked == 20);
}

TEST_CASE("matmul values") {
	const auto a = Tensor::from({2, 2}, {1, 2, 3, 4});
	const auto b = Tensor::from({2, 1}, {5, 6});
	const auto c = matmul(a, b);
	CHECK(c.shape() == Shape{2, 1});
	CHECK(c.at(0) == 17.0);
	CHECK(c.at(1) == 39.0);
}

TEST_CASE("per-op gradients over random seeds") {
	for (std::uint64_t seed = 0; seed < 20; ++seed) {
		CAPTURE(seed);
		testing::Rng rng(seed);
		const auto x = random_tensor(rng, {2, 3, 4});
		const auto y = random_tensor(rng, {2, 3, 4});
		const auto row = random_tensor(rng, {4});
		const auto col = random_tensor(rng, {2, 1, 4});
		const auto gamma = random_tensor(rng, {4});
		const auto beta = random_tensor(rng, {4});
		const auto rhs = random_tensor(rng, {4, 5});
		const auto brhs = random_tensor(rng, {2, 4, 3});

		CHECK(check([&](const auto &in) { return probe(matmul(in[0], in[1]), seed); }, {x, rhs}).passed);
		CHECK(check([&](const auto &in) { return probe(matmul(in[0], in[1]), seed); }, {x, brhs}).passed);
		CHECK(check([&](const auto &in) { return probe(add(in[0], in[1]), seed); }, {x, row}).passed);
		CHECK(check([&](const auto &in) { return probe(sub(in[0], in[1]), seed); }, {x, col}).passed);
		CHECK(check([&](const auto &in) { return probe(mul(in[0], in[1]), seed); }, {x, y}).passed);
		CHECK(check([&](const auto &in) { return probe(mul(in[0], in[1]), seed); }, {x, col}).passed);
		CHECK(check([&](const auto &in) { return probe(scale(in[0], -2.5), seed); }, {x}).passed);
		CHECK(check([&](const auto &in) { return probe(softmax(in[0]), seed); }, {x}).passed);
		CHECK(check([&](const auto &in) { return probe(layer_norm(in[0], in[1], in[2]), seed); }, {x, gamma, beta})
		          .passed);
		CHECK(check([&](const auto &in) { return probe(layer_norm(in[0], Tensor(), Tensor()), seed); }, {x}).passed);
		CHECK(check([&](const auto &in) { return probe(concat({in[0], in[1]}, 1), seed); }, {x, y}).passed);
		CHECK(check([&](const auto &in) { return probe(concat({in[0], in[1]}, 2), seed); }, {x, y}).passed);
		CHECK(check([&](const auto &in) { return probe(sum(in[0], 1), seed); }, {x}).passed);
		CHECK(check([&](const auto &in) { return probe(mean(in[0], 2), seed); }, {x}).passed);
		CHECK(check([&](const auto &in) { return probe(permute(in[0], {2, 0, 1}), seed); }, {x}).passed);
		CHECK(check([&](const auto &in) { return probe(transpose(in[0]), seed); }, {x}).passed);
		CHECK(check([&](const auto &in) { return probe(reshape(in[0], {6, 4}), seed); }, {x}).passed);
		CHECK(check([&](const auto &in) { return probe(broadcast_to(in[0], {2, 3, 4}), seed); }, {col}).passed);
		const std::vector<std::size_t> idx = {3, 0, 1, 1, 2, 0};
		CHECK(check([&](const auto &in) { return probe(gather(in[0], 1, idx, 3), seed); }, {random_tensor(rng, {2, 4, 3})})
		          .passed);
		const Mask m = {0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0};
		CHECK(check([&](const auto &in) { return probe(softmax(masked_fill(in[0], m, -1e9)), seed); }, {x}).passed);
		// relu away from the kink
		auto shifted = Tensor::from(x.shape(), std::vector<double>(x.values().begin(), x.values().end()), true);
		for (auto &v : shifted.mutableValues()) {
			v += v >= 0 ? 0.1 : -0.1;
		}
		CHECK(check([&](const auto &in) { return probe(relu(in[0]), seed); }, {shifted}).passed);
	}
}

TEST_CASE("masked entries receive no gradient") {
	auto x = Tensor::from({3}, {1.0, 2.0, 3.0}, true);
	const Mask m = {0, 1, 0};
	const auto y = masked_fill(x, m, -1e9);
	CHECK(y.at(1) == -1e9);
	sum_all(softmax(y)).backward();
	CHECK(x.grad()[1] == 0.0);
	CHECK_THROWS_AS(masked_fill(x, Mask{1, 0}, 0.0), ShapeError);
}

TEST_CASE("dropout") {
	testing::Rng rng(2);
	const auto x = random_tensor(rng, {1000}, false);
	CHECK(dropout(x, 0.3, 5, false).values().data() != nullptr);
	const auto eval = dropout(x, 0.3, 5, false);
	for (std::size_t i = 0; i < x.numel(); ++i) {
		CHECK(eval.at(i) == x.at(i));
	}
	const auto a = dropout(x, 0.3, 5);
	const auto b = dropout(x, 0.3, 5);
	std::size_t dropped = 0;
	for (std::size_t i = 0; i < x.numel(); ++i) {
		CHECK(a.at(i) == b.at(i));
		if (a.at(i) == 0.0) {
			++dropped;
		} else {
			CHECK(a.at(i) == doctest::Approx(x.at(i) / 0.7).epsilon(1e-15));
		}
	}
	CHECK(dropped > 240);
	CHECK(dropped < 360);
	const auto c = dropout(x, 0.3, 6);
	bool differs = false;
	for (std::size_t i = 0; i < x.numel(); ++i) {
		differs = differs || (a.at(i) != c.at(i));
	}
	CHECK(differs);
}

TEST_CASE("dropout gradient follows the mask") {
	auto x = Tensor::full({200}, 1.0, true);
	const auto y = dropout(x, 0.5, 17);
	sum_all(y).backward();
	for (std::size_t i = 0; i < 200; ++i) {
		CHECK(x.grad()[i] == y.at(i));
	}
}

TEST_CASE("shape errors name both shapes") {
	const auto a = Tensor::zeros({3, 4});
	const auto b = Tensor::zeros({3, 2});
	CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("[3, 4]"), ShapeError);
	CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("[3, 2]"), ShapeError);
	CHECK_THROWS_WITH_AS(add(Tensor::zeros({2, 3}), Tensor::zeros({4})), doctest::Contains("[2, 3]"), ShapeError);
	const std::vector<std::size_t> idx = {5};
	CHECK_THROWS_AS(gather(Tensor::zeros({1, 3, 2}), 1, idx, 1), ShapeError);
}

TEST_CASE("broadcast add values") {
	const auto a = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
	const auto b = Tensor::from({3}, {10, 20, 30});
	const auto c = Tensor::from({2, 1}, {100, 200});
	const auto ab = add(a, b);
	const auto ac = add(a, c);
	const std::vector<double> want_ab = {11, 22, 33, 14, 25, 36};
	const std::vector<double> want_ac = {101, 102, 103, 204, 205, 206};
	for (std::size_t i = 0; i < 6; ++i) {
		CHECK(ab.at(i) == want_ab[i]);
		CHECK(ac.at(i) == want_ac[i]);
	}
}

TEST_CASE("gradients accumulate across uses") {
	auto x = Tensor::from({2}, {1.0, -3.0}, true);
	sum_all(add(mul(x, x), scale(x, 3.0))).backward();
	CHECK(x.grad()[0] == 5.0);
	CHECK(x.grad()[1] == -3.0);
}

TEST_CASE("no-grad guard records nothing") {
	auto x = Tensor::from({2}, {1.0, 2.0}, true);
	{
		NoGradGuard guard;
		const auto y = mul(x, x);
		CHECK_FALSE(y.requiresGrad());
	}
	CHECK(mul(x, x).requiresGrad());
}

TEST_CASE("non-finite values are traced to the op chain") {
	const auto x = Tensor::from({2}, {1.0, std::numeric_limits<double>::infinity()}, true);
	const auto y = sum_all(scale(relu(x), 2.0));
	const auto trace = find_non_finite(y);
	REQUIRE(trace.has_value());
	CHECK(trace->find("relu") != std::string::npos);
	CHECK(trace->find("sum_all") != std::string::npos);
	CHECK_FALSE(find_non_finite(sum_all(Tensor::from({1}, {1.0}))).has_value());
	CHECK_THROWS_AS(check_gradients([](const auto &in) { return sum_all(in[0]); }, {x}), NumericError);
}
