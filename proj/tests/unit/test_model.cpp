#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "sqf/core/error.hpp"
#include "sqf/diff/ops.hpp"
#include "sqf/model/checkpoint.hpp"
#include "sqf/model/network.hpp"
#include "sqf/pipeline/schema.hpp"
#include "test_support.hpp"

using namespace sqf;
using namespace sqf::model;
using diff::Shape;

namespace {

ModelConfig small_config() {
	ModelConfig c = config_for_schema(pipeline::default_schema());
	c.d_model = 8;
	c.n_heads = 2;
	c.n_layers = 2;
	c.ffn_dim = 16;
	c.dropout = 0.0;
	return c;
}

void randomize(ModelParams &params, std::uint64_t seed, double scale = 0.3) {
	testing::Rng rng(seed);
	std::normal_distribution<double> normal(0.0, scale);
	for (auto &nt : params.named()) {
		for (auto &v : nt.tensor.mutableValues()) {
			v = normal(rng);
		}
	}
}

Tensor random_tensor(testing::Rng &rng, Shape shape) {
	std::normal_distribution<double> normal(0.0, 1.0);
	std::size_t n = 1;
	for (auto s : shape) {
		n *= s;
	}
	std::vector<double> v(n);
	for (auto &x : v) {
		x = normal(rng);
	}
	return Tensor::from(std::move(shape), std::move(v));
}

std::vector<double> vec_linear(const std::vector<double> &x, const Linear &l) {
	const std::size_t in = l.weight.size(0);
	const std::size_t out = l.weight.size(1);
	std::vector<double> y(out);
	for (std::size_t o = 0; o < out; ++o) {
		double acc = l.bias.at(o);
		for (std::size_t i = 0; i < in; ++i) {
			acc += x[i] * l.weight.at(i * out + o);
		}
		y[o] = acc;
	}
	return y;
}

std::vector<double> vec_layer_norm(const std::vector<double> &x, const LayerNormParams &p) {
	double mean = 0.0;
	for (double v : x) {
		mean += v;
	}
	mean /= static_cast<double>(x.size());
	double var = 0.0;
	for (double v : x) {
		var += (v - mean) * (v - mean);
	}
	var /= static_cast<double>(x.size());
	std::vector<double> y(x.size());
	for (std::size_t i = 0; i < x.size(); ++i) {
		y[i] = (x[i] - mean) / std::sqrt(var + 1e-5) * p.gamma.at(i) + p.beta.at(i);
	}
	return y;
}

std::vector<ForecastSample> random_samples(std::uint64_t seed, std::size_t n) {
	testing::Rng rng(seed);
	std::vector<ForecastSample> out;
	for (std::size_t i = 0; i < n; ++i) {
		out.push_back(testing::random_sample(rng, 3, 3, 22, 21, "c" + std::to_string(i)));
	}
	return out;
}

Tensor run(const ModelParams &p, const ModelConfig &c, const Batch &b) {
	ForwardContext ctx;
	diff::NoGradGuard guard;
	return forward(p, c, b, ctx);
}

double max_abs_diff(const Tensor &a, const Tensor &b) {
	double m = 0.0;
	for (std::size_t i = 0; i < a.numel(); ++i) {
		m = std::max(m, std::abs(a.at(i) - b.at(i)));
	}
	return m;
}

} // namespace

TEST_CASE("embedding with zero weights yields the positional encoding") {
	Linear zero{Tensor::zeros({5, 6}), Tensor::zeros({6})};
	const auto out = embed_and_position(Tensor::zeros({1, 4, 5}), zero);
	const auto pe = positional_encoding(4, 6);
	for (std::size_t i = 0; i < pe.numel(); ++i) {
		CHECK(out.at(i) == pe.at(i));
	}
	CHECK(pe.at(0) == 0.0);
	CHECK(pe.at(1) == 1.0);
	// position 1, dims 2/3: angle 1 / 10000^(2/6)
	const double angle = 1.0 / std::pow(10000.0, 2.0 / 6.0);
	CHECK(pe.at(6 + 2) == doctest::Approx(std::sin(angle)).epsilon(1e-15));
	CHECK(pe.at(6 + 3) == doctest::Approx(std::cos(angle)).epsilon(1e-15));
	CHECK_THROWS_AS(embed_and_position(Tensor::zeros({1, 4, 3}), zero), ShapeError);
}

TEST_CASE("identical tokens differ by the positional offset") {
	testing::Rng rng(1);
	Linear emb{random_tensor(rng, {3, 4}), random_tensor(rng, {4})};
	const auto tok = Tensor::from({1, 2, 3}, {0.5, -1.0, 2.0, 0.5, -1.0, 2.0});
	const auto out = embed_and_position(tok, emb);
	const auto pe = positional_encoding(2, 4);
	for (std::size_t j = 0; j < 4; ++j) {
		CHECK(out.at(4 + j) - out.at(j) == doctest::Approx(pe.at(4 + j) - pe.at(j)).epsilon(1e-12));
	}
}

TEST_CASE("all-true mask equals the unmasked encoding") {
	auto c = small_config();
	auto p = init_params(c, 3);
	testing::Rng rng(2);
	const auto x = random_tensor(rng, {2, 5, 8});
	ForwardContext ctx;
	const auto a = encode(x, Mask(10, 1), p.history_encoder, c, ctx);
	// A batch of one valid and one padded sequence exercises the masked code path on row 0.
	Mask mixed(10, 1);
	mixed[9] = 0;
	const auto b = encode(x, mixed, p.history_encoder, c, ctx);
	for (std::size_t i = 0; i < 5 * 8; ++i) {
		CHECK(a.at(i) == doctest::Approx(b.at(i)).epsilon(1e-14));
	}
}

TEST_CASE("masked positions do not influence unmasked ones") {
	auto c = small_config();
	auto p = init_params(c, 5);
	randomize(p, 6);
	testing::Rng rng(7);
	for (int trial = 0; trial < 20; ++trial) {
		auto x = random_tensor(rng, {1, 6, 8});
		Mask mask = {1, 0, 1, 1, 0, 1};
		ForwardContext ctx;
		const auto base = encode(x, mask, p.history_encoder, c, ctx);
		auto vals = std::vector<double>(x.values().begin(), x.values().end());
		for (std::size_t j = 0; j < 8; ++j) {
			vals[1 * 8 + j] += 50.0 * std::sin(static_cast<double>(trial + j));
			vals[4 * 8 + j] -= 30.0;
		}
		const auto moved = encode(Tensor::from({1, 6, 8}, vals), mask, p.history_encoder, c, ctx);
		for (std::size_t pos : {0u, 2u, 3u, 5u}) {
			for (std::size_t j = 0; j < 8; ++j) {
				CHECK(std::abs(base.at(pos * 8 + j) - moved.at(pos * 8 + j)) <= 1e-9);
			}
		}
	}
}

TEST_CASE("fully masked sequence is degenerate") {
	auto c = small_config();
	auto p = init_params(c, 1);
	ForwardContext ctx;
	CHECK_THROWS_AS(encode(Tensor::zeros({1, 3, 8}), Mask{0, 0, 0}, p.history_encoder, c, ctx), DegenerateInputError);
	CHECK_THROWS_AS(pool_history(Tensor::zeros({1, 3, 8}), Mask{0, 0, 0}), DegenerateInputError);
}

TEST_CASE("single token layer matches a hand trace") {
	auto c = small_config();
	c.n_layers = 1;
	auto p = init_params(c, 11);
	randomize(p, 12);
	testing::Rng rng(13);
	const auto x = random_tensor(rng, {1, 1, 8});
	ForwardContext ctx;
	const auto got = encode(x, Mask{1}, p.history_encoder, c, ctx);

	const auto &layer = p.history_encoder.layers[0];
	std::vector<double> v(x.values().begin(), x.values().end());
	// Attention over one key puts weight 1 on it, so the block reduces to O(V(LN x)).
	const auto attn = vec_linear(vec_linear(vec_layer_norm(v, layer.norm1), layer.value), layer.output);
	std::vector<double> x1(8);
	for (std::size_t i = 0; i < 8; ++i) {
		x1[i] = v[i] + attn[i];
	}
	auto hidden = vec_linear(vec_layer_norm(x1, layer.norm2), layer.ffn1);
	for (auto &h : hidden) {
		h = std::max(h, 0.0);
	}
	const auto ffn = vec_linear(hidden, layer.ffn2);
	for (std::size_t i = 0; i < 8; ++i) {
		CHECK(got.at(i) == doctest::Approx(x1[i] + ffn[i]).epsilon(1e-12));
	}
}

TEST_CASE("history pooling") {
	const auto enc = Tensor::from({1, 3, 2}, {1, 2, 3, 4, 100, 200});
	const auto one = pool_history(enc, Mask{0, 1, 0});
	CHECK(one.at(0) == 3.0);
	CHECK(one.at(1) == 4.0);
	const auto two = pool_history(enc, Mask{1, 1, 0});
	CHECK(two.at(0) == 2.0);
	CHECK(two.at(1) == 3.0);
	const auto same = pool_history(Tensor::from({1, 2, 2}, {5, 6, 5, 6}), Mask{1, 1});
	CHECK(same.at(0) == 5.0);
	CHECK(same.at(1) == 6.0);
}

TEST_CASE("future selection") {
	std::vector<double> v(15 * 2);
	for (std::size_t i = 0; i < v.size(); ++i) {
		v[i] = static_cast<double>(i);
	}
	const auto enc = Tensor::from({1, 15, 2}, v);
	const std::vector<std::size_t> idx = {4, 9, 14};
	const auto sel = select_future(enc, idx, 3);
	CHECK(sel.shape() == Shape{1, 3, 2});
	CHECK(sel.at(0) == 8.0);
	CHECK(sel.at(2) == 18.0);
	CHECK(sel.at(4) == 28.0);
	const std::vector<std::size_t> first = {0, 1, 2};
	const auto head = select_future(enc, first, 3);
	for (std::size_t i = 0; i < 6; ++i) {
		CHECK(head.at(i) == v[i]);
	}
	const std::vector<std::size_t> bad = {0, 1, 15};
	CHECK_THROWS_AS(select_future(enc, bad, 3), ShapeError);
}

TEST_CASE("quantile head examples") {
	const auto pooled = Tensor::from({1, 2}, {0.3, -0.7});
	const auto selected = Tensor::from({1, 3, 2}, {1, 2, 3, 4, 5, 6});
	Linear zero{Tensor::zeros({4, 3}), Tensor::zeros({3})};
	const auto z = quantile_head(pooled, selected, zero);
	CHECK(z.shape() == Shape{1, 3, 3});
	for (double v : z.values()) {
		CHECK(v == 0.0);
	}
	Linear bias{Tensor::zeros({4, 3}), Tensor::from({3}, {0.1, 0.5, 0.9})};
	const auto b = quantile_head(pooled, selected, bias);
	for (std::size_t k = 0; k < 3; ++k) {
		CHECK(b.at(3 * k) == 0.1);
		CHECK(b.at(3 * k + 1) == 0.5);
		CHECK(b.at(3 * k + 2) == 0.9);
	}
}

TEST_CASE("full forward shape") {
	auto c = small_config();
	const auto p = init_params(c, 4);
	const auto samples = random_samples(5, 2);
	const auto y = run(p, c, make_batch(samples));
	CHECK(y.shape() == Shape{2, 3, 3});
	for (double v : y.values()) {
		CHECK(std::isfinite(v));
	}
}

TEST_CASE("unselected future days still receive gradient through attention") {
	auto c = small_config();
	auto p = init_params(c, 8);
	const auto samples = random_samples(9, 1);
	auto batch = make_batch(samples);
	batch.future_tokens.setRequiresGrad(true);
	ForwardContext ctx;
	sum_all(forward(p, c, batch, ctx)).backward();
	const auto g = batch.future_tokens.grad();
	REQUIRE(g.size() == 15 * 21);
	double unselected = 0.0;
	for (std::size_t j = 0; j < 15; ++j) {
		if (j % 5 == 4) {
			continue;
		}
		for (std::size_t f = 0; f < 21; ++f) {
			unselected += std::abs(g[j * 21 + f]);
		}
	}
	CHECK(unselected > 0.0);
}

TEST_CASE("parameter count by hand") {
	ModelConfig c;
	c.d_model = 1;
	c.n_heads = 1;
	c.n_layers = 0;
	c.ffn_dim = 1;
	// history embedding 22 + 1, future embedding 21 + 1, head 2·3 + 3
	CHECK(count_parameters(c) == 23 + 22 + 9);
	// Q, K, V, O: 4·(d² + d); two norms 4d; ffn 2·d·f + f + d
	ModelConfig l = c;
	l.d_model = 4;
	l.n_heads = 2;
	l.ffn_dim = 6;
	CHECK(layer_parameter_count(l) == 4 * 20 + 16 + 24 + 6 + 24 + 4);
	for (std::size_t layers = 0; layers < 4; ++layers) {
		l.n_layers = layers;
		ModelConfig next = l;
		next.n_layers = layers + 1;
		CHECK(count_parameters(next) - count_parameters(l) == 2 * layer_parameter_count(l));
	}
}

TEST_CASE("parameter count agrees with the allocated tensors") {
	for (bool use_future : {true, false}) {
		auto c = small_config();
		c.use_future = use_future;
		const auto p = init_params(c, 1);
		std::size_t n = 0;
		for (const auto &nt : p.named()) {
			n += nt.tensor.numel();
		}
		CHECK(n == count_parameters(c));
	}
}

TEST_CASE("input switches gate the right channels") {
	auto c = small_config();
	const auto p = init_params(c, 21);
	auto samples = random_samples(22, 2);
	auto changed = samples;
	for (auto &s : changed) {
		for (std::size_t k = 0; k < 3; ++k) {
			s.history_tokens(k, 0) += 1.0;
		}
	}
	CHECK(max_abs_diff(run(p, c, make_batch(samples)), run(p, c, make_batch(changed))) > 1e-6);
	c.use_target = false;
	CHECK(max_abs_diff(run(p, c, make_batch(samples)), run(p, c, make_batch(changed))) == 0.0);

	c = small_config();
	changed = samples;
	for (auto &s : changed) {
		s.future_tokens(0, 10) += 2.0; // engineered
		s.history_tokens(1, 3) += 2.0; // raw weather
	}
	c.use_feature_engineering = false;
	c.use_history_covariates = false;
	const double moved = max_abs_diff(run(p, c, make_batch(samples)), run(p, c, make_batch(changed)));
	CHECK(moved == 0.0);

	c = small_config();
	c.use_future = false;
	const auto nf = init_params(c, 21);
	changed = samples;
	for (auto &s : changed) {
		s.future_tokens(3, 2) += 5.0;
	}
	CHECK(max_abs_diff(run(nf, c, make_batch(samples)), run(nf, c, make_batch(changed))) == 0.0);
}

TEST_CASE("checkpoint round trip") {
	auto c = small_config();
	c.use_future = false;
	c.quantile_sort = true;
	Checkpoint ck;
	ck.config = c;
	ck.schema_hash = 0x1234abcdULL;
	ck.scaler.names = {"ndvi", "wind"};
	ck.scaler.variables = {{0.4, 0.02, 1e-8}, {3.0, 2.0, 1e-8}};
	ck.params = init_params(c, 77);
	randomize(ck.params, 78);
	std::stringstream buf;
	write_checkpoint(buf, ck);
	const auto back = read_checkpoint(buf);
	CHECK(back.config == ck.config);
	CHECK(back.schema_hash == ck.schema_hash);
	CHECK(back.scaler == ck.scaler);
	const auto a = ck.params.named();
	const auto b = back.params.named();
	REQUIRE(a.size() == b.size());
	for (std::size_t i = 0; i < a.size(); ++i) {
		CHECK(a[i].name == b[i].name);
		CHECK(a[i].tensor.shape() == b[i].tensor.shape());
		CHECK(std::equal(a[i].tensor.values().begin(), a[i].tensor.values().end(), b[i].tensor.values().begin()));
	}

	std::stringstream bad("SQFX");
	CHECK_THROWS_AS(read_checkpoint(bad), InputFormatError);
}

TEST_CASE("init and prediction are deterministic") {
	auto c = small_config();
	const auto a = init_params(c, 5);
	const auto b = init_params(c, 5);
	const auto d = init_params(c, 6);
	const auto na = a.named();
	const auto nb = b.named();
	const auto nd = d.named();
	bool differs = false;
	for (std::size_t i = 0; i < na.size(); ++i) {
		CHECK(std::equal(na[i].tensor.values().begin(), na[i].tensor.values().end(), nb[i].tensor.values().begin()));
		differs = differs ||
		          !std::equal(na[i].tensor.values().begin(), na[i].tensor.values().end(), nd[i].tensor.values().begin());
	}
	CHECK(differs);

	const auto samples = random_samples(3, 9);
	const auto one = predict(a, c, samples, 2, 1);
	const auto many = predict(a, c, samples, 2, 3);
	CHECK(one == many);
	const auto whole = predict(a, c, samples, 64, 1);
	for (std::size_t i = 0; i < samples.size(); ++i) {
		for (std::size_t k = 0; k < one[i].values.data.size(); ++k) {
			CHECK(one[i].values.data[k] == doctest::Approx(whole[i].values.data[k]).epsilon(1e-12));
		}
	}
}

TEST_CASE("quantile sort") {
	std::vector<double> v = {0.3, 0.1, 0.2, 1.0, 2.0, 0.0};
	sort_quantiles(v, 3);
	CHECK(v == std::vector<double>{0.1, 0.2, 0.3, 0.0, 1.0, 2.0});
}

TEST_CASE("config validation") {
	auto c = small_config();
	c.n_heads = 3;
	CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("model.n_heads"), ConfigError);
	c = small_config();
	c.dropout = 1.0;
	CHECK_THROWS_AS(c.validate(), ConfigError);
}
