#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <doctest.h>

#include "sqf/core/error.hpp"
#include "sqf/diff/ops.hpp"
#include "sqf/model/network.hpp"
#include "sqf/pipeline/schema.hpp"
#include "sqf/train/loss.hpp"
#include "sqf/train/optim.hpp"
#include "sqf/train/trainer.hpp"
#include "test_support.hpp"

using namespace sqf;
using namespace sqf::train;

namespace {

std::vector<ForecastSample> random_samples(std::uint64_t seed, std::size_t n) {
	testing::Rng rng(seed);
	std::vector<ForecastSample> out;
	for (std::size_t i = 0; i < n; ++i) {
		out.push_back(testing::random_sample(rng, 3, 3, 22, 21, "c" + std::to_string(i)));
	}
	return out;
}

ScalerParams ndvi_scaler() {
	ScalerParams s;
	s.names = {"ndvi"};
	s.variables = {{0.45, 0.04, 1e-8}};
	return s;
}

model::ModelConfig tiny_model() {
	auto c = model::config_for_schema(pipeline::default_schema());
	c.d_model = 8;
	c.n_heads = 2;
	c.n_layers = 1;
	c.ffn_dim = 16;
	return c;
}

TrainConfig tiny_train() {
	TrainConfig t;
	t.epochs = 3;
	t.batch_size = 8;
	t.lr = 1e-3;
	return t;
}

/// Flat loop over every (sample, step, level) entry.
double scalar_loss(const std::vector<double> &pred, const LossTargets &t, const std::array<double, 3> &q,
                   const LossOptions &opt) {
	double total = 0.0;
	std::size_t count = 0;
	for (std::size_t b = 0; b < t.batch; ++b) {
		for (std::size_t k = 0; k < t.horizon; ++k) {
			const double w = opt.use_temporal_weights ? 1.0 / (1.0 + opt.alpha * t.delta_days[b * t.horizon + k]) : 1.0;
			for (std::size_t j = 0; j < q.size(); ++j) {
				const double y = t.targets[b * t.horizon + k];
				const double yhat = pred[(b * t.horizon + k) * q.size() + j];
				const double r = y - yhat;
				total += w * (r >= 0 ? q[j] * r : (q[j] - 1.0) * r);
				++count;
			}
		}
	}
	return total / static_cast<double>(count);
}

} // namespace

TEST_CASE("pinball examples") {
	CHECK(pinball(1.0, 0.0, 0.5) == 0.5);
	CHECK(pinball(0.0, 1.0, 0.9) == doctest::Approx(0.1).epsilon(1e-15));
	CHECK(pinball(0.3, 0.3, 0.1) == 0.0);
	CHECK(pinball(2.0, 1.0, 0.1) == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("temporal weights") {
	CHECK(temporal_weight(0.0, 0.5) == 1.0);
	CHECK(temporal_weight(2.0, 0.5) == 0.5);
	CHECK(temporal_weight(10.0, 0.5) == 1.0 / 6.0);
	CHECK(temporal_weight(5.0, 0.5) == 2.0 / 7.0);
	CHECK(temporal_weight(15.0, 0.5) == 2.0 / 17.0);
}

TEST_CASE("batch loss examples") {
	const std::array<double, 3> q = {0.1, 0.5, 0.9};
	LossTargets t{1, 1, {0.4}, {2.0}};
	LossOptions opt;
	const auto perfect = batch_loss(diff::Tensor::from({1, 1, 3}, {0.4, 0.4, 0.4}), t, q, opt);
	CHECK(perfect.item() == 0.0);
	const std::vector<double> pred = {0.1, 0.5, 0.9};
	const double a = pinball(0.4, 0.1, 0.1);
	const double b = pinball(0.4, 0.5, 0.5);
	const double c = pinball(0.4, 0.9, 0.9);
	const auto loss = batch_loss(diff::Tensor::from({1, 1, 3}, pred), t, q, opt);
	CHECK(loss.item() == doctest::Approx(0.5 * (a + b + c) / 3.0).epsilon(1e-15));
}

TEST_CASE("batch loss equals the scalar loop") {
	const std::array<double, 3> q = {0.1, 0.5, 0.9};
	testing::Rng rng(4);
	std::normal_distribution<double> normal(0.0, 1.0);
	std::uniform_int_distribution<int> days(1, 30);
	for (int trial = 0; trial < 100; ++trial) {
		const std::size_t B = 1 + rng() % 7;
		const std::size_t h = 1 + rng() % 4;
		LossTargets t{B, h, {}, {}};
		std::vector<double> pred(B * h * 3);
		for (auto &p : pred) {
			p = normal(rng);
		}
		for (std::size_t i = 0; i < B * h; ++i) {
			t.targets.push_back(normal(rng));
			t.delta_days.push_back(days(rng));
		}
		for (bool weighted : {true, false}) {
			LossOptions opt;
			opt.use_temporal_weights = weighted;
			opt.alpha = 0.25 + 0.5 * (trial % 3);
			const auto got = batch_loss(diff::Tensor::from({B, h, 3}, pred), t, q, opt).item();
			CHECK(std::abs(got - scalar_loss(pred, t, q, opt)) <= 1e-12);
		}
	}
}

TEST_CASE("batch loss gradient") {
	const std::array<double, 3> q = {0.1, 0.5, 0.9};
	LossTargets t{1, 2, {0.0, 1.0}, {5.0, 10.0}};
	auto pred = diff::Tensor::from({1, 2, 3}, {-1, 1, 2, 0.5, 1.5, 3}, true);
	batch_loss(pred, t, q, LossOptions{}).backward();
	const double w0 = 2.0 / 7.0;
	const double w1 = 1.0 / 6.0;
	// Under-prediction: -q·w/N; over-prediction: (1-q)·w/N.
	const std::vector<double> want = {-0.1 * w0 / 6, 0.5 * w0 / 6, 0.1 * w0 / 6, -0.1 * w1 / 6, 0.5 * w1 / 6, 0.1 * w1 / 6};
	for (std::size_t i = 0; i < 6; ++i) {
		CHECK(pred.grad()[i] == doctest::Approx(want[i]).epsilon(1e-14));
	}
}

TEST_CASE("loss targets are scaled") {
	const auto samples = random_samples(1, 2);
	const auto scaler = ndvi_scaler();
	const auto t = loss_targets(samples, &scaler.variables[0]);
	REQUIRE(t.targets.size() == 6);
	CHECK(t.targets[0] == std::asinh((samples[0].targets[0] - 0.45) / std::sqrt(0.04 + 1e-8)));
	CHECK(t.delta_days == std::vector<double>{5, 10, 15, 5, 10, 15});
	const auto raw = loss_targets(samples, nullptr);
	CHECK(raw.targets[4] == samples[1].targets[1]);
}

TEST_CASE("adam hand computation") {
	std::vector<double> p = {1.0};
	AdamState s;
	adam_step(p, std::vector<double>{0.5}, s, 0.1);
	// m̂ = g, v̂ = g², update = lr·g/(|g| + eps)
	CHECK(p[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-15));
	CHECK(s.t == 1);
	CHECK(s.m[0] == doctest::Approx(0.05).epsilon(1e-15));
	CHECK(s.v[0] == doctest::Approx(0.001 * 0.25).epsilon(1e-15));
}

TEST_CASE("adam matches a scalar reference trace") {
	const double lr = 0.01;
	const double b1 = 0.9;
	const double b2 = 0.999;
	std::vector<double> p = {0.3, -2.0};
	AdamState s;
	double ref[2] = {0.3, -2.0};
	double m[2] = {0, 0};
	double v[2] = {0, 0};
	const std::vector<double> g = {0.7, -0.2};
	for (int t = 1; t <= 2; ++t) {
		adam_step(p, g, s, lr);
		for (int i = 0; i < 2; ++i) {
			m[i] = b1 * m[i] + (1 - b1) * g[static_cast<std::size_t>(i)];
			v[i] = b2 * v[i] + (1 - b2) * g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(i)];
			const double mh = m[i] / (1 - std::pow(b1, t));
			const double vh = v[i] / (1 - std::pow(b2, t));
			ref[i] -= lr * mh / (std::sqrt(vh) + 1e-8);
		}
	}
	CHECK(p[0] == doctest::Approx(ref[0]).epsilon(1e-14));
	CHECK(p[1] == doctest::Approx(ref[1]).epsilon(1e-14));
}

TEST_CASE("adam zero gradient and non-finite gradient") {
	std::vector<double> p = {1.0, 2.0};
	AdamState s;
	adam_step(p, std::vector<double>{1.0, 1.0}, s, 0.1);
	const auto after = p;
	const auto m = s.m;
	adam_step(p, std::vector<double>{0.0, 0.0}, s, 0.1);
	CHECK(s.m[0] == doctest::Approx(0.9 * m[0]).epsilon(1e-15));
	// m is non-zero so the parameter still moves; the moment decays.
	CHECK(p[0] < after[0]);

	std::vector<double> fresh = {1.0};
	AdamState z;
	adam_step(fresh, std::vector<double>{0.0}, z, 0.1);
	CHECK(fresh[0] == 1.0);

	const auto before = p;
	const auto state = s;
	CHECK_THROWS_AS(adam_step(p, std::vector<double>{0.1, std::numeric_limits<double>::quiet_NaN()}, s, 0.1),
	                NumericError);
	CHECK(p == before);
	CHECK(s.t == state.t);
	CHECK(s.m == state.m);
}

TEST_CASE("adam over tensors validates every gradient first") {
	auto a = diff::Tensor::from({1}, {1.0}, true);
	auto b = diff::Tensor::from({1}, {1.0}, true);
	Adam opt({a, b});
	a.mutableGrad()[0] = 1.0;
	b.mutableGrad()[0] = std::numeric_limits<double>::infinity();
	CHECK_THROWS_AS(opt.step(0.1), NumericError);
	CHECK(a.at(0) == 1.0);
	opt.zeroGrad();
	a.mutableGrad()[0] = 1.0;
	opt.step(0.1);
	CHECK(a.at(0) < 1.0);
	CHECK(b.at(0) == 1.0);
}

TEST_CASE("plateau scheduler") {
	SUBCASE("improving") {
		PlateauScheduler s(1e-4);
		for (int e = 0; e < 50; ++e) {
			CHECK(s.step(1.0 - 0.01 * e) == 1e-4);
		}
	}
	SUBCASE("flat epochs floor at the minimum") {
		PlateauScheduler s(1e-4);
		s.step(1.0);
		for (int e = 0; e < 19; ++e) {
			CHECK(s.step(1.0) == 1e-4);
		}
		CHECK(s.step(1.0) == 5e-5);
		CHECK(s.badEpochs() == 0);
		for (int e = 0; e < 100; ++e) {
			CHECK(s.step(1.0) == 5e-5);
		}
	}
	SUBCASE("reduction by factor") {
		PlateauScheduler s(1.0, {0.2, 2, 1e-3});
		s.step(1.0);
		s.step(2.0);
		CHECK(s.step(1.0) == doctest::Approx(0.2));
		s.step(1.5);
		CHECK(s.step(1.5) == doctest::Approx(0.04));
		CHECK(s.step(0.5) == doctest::Approx(0.04));
		CHECK(s.best() == 0.5);
	}
}

TEST_CASE("one small step lowers the batch loss") {
	auto c = tiny_model();
	c.dropout = 0.0;
	const auto samples = random_samples(3, 4);
	const auto scaler = ndvi_scaler();
	auto params = model::init_params(c, 9);
	std::vector<diff::Tensor> leaves;
	for (const auto &p : params.named()) {
		leaves.push_back(p.tensor);
	}
	Adam opt(leaves);
	const auto batch = model::make_batch(samples);
	const auto targets = loss_targets(samples, &scaler.variables[0]);
	auto loss_now = [&] {
		model::ForwardContext ctx;
		return batch_loss(model::forward(params, c, batch, ctx), targets, c.quantiles, LossOptions{});
	};
	const auto before = loss_now();
	before.backward();
	opt.step(1e-4);
	diff::NoGradGuard guard;
	CHECK(loss_now().item() < before.item());
}

TEST_CASE("seeded training is reproducible") {
	const auto train_set = random_samples(10, 20);
	const auto val_set = random_samples(11, 6);
	const auto a = train::train(train_set, val_set, ndvi_scaler(), tiny_model(), tiny_train());
	const auto b = train::train(train_set, val_set, ndvi_scaler(), tiny_model(), tiny_train());
	REQUIRE(a.history.size() == 3);
	CHECK(a.history == b.history);
	CHECK_FALSE(a.aborted);
	std::ostringstream sa;
	std::ostringstream sb;
	write_history_csv(sa, a.history);
	write_history_csv(sb, b.history);
	CHECK(sa.str() == sb.str());
	CHECK(sa.str().rfind("epoch,train_loss,val_loss,lr\n", 0) == 0);

	auto other = tiny_train();
	other.rng_seed = 43;
	CHECK_FALSE(train::train(train_set, val_set, ndvi_scaler(), tiny_model(), other).history == a.history);
}

TEST_CASE("best parameters track the lowest validation loss") {
	const auto train_set = random_samples(12, 16);
	const auto val_set = random_samples(13, 6);
	auto cfg = tiny_train();
	cfg.epochs = 4;
	const auto r = train::train(train_set, val_set, ndvi_scaler(), tiny_model(), cfg);
	double best = std::numeric_limits<double>::infinity();
	for (const auto &rec : r.history) {
		best = std::min(best, rec.val_loss);
	}
	CHECK(r.best_val_loss == best);
	CHECK(r.history[r.best_epoch - 1].val_loss == best);
	const double again = evaluate_loss(r.best_params, r.config, val_set, ndvi_scaler(), cfg);
	CHECK(again == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("numeric blow-up aborts and keeps the last good parameters") {
	const auto train_set = random_samples(14, 16);
	const auto val_set = random_samples(15, 6);
	auto cfg = tiny_train();
	cfg.epochs = 5;
	cfg.lr = 1e300;
	const auto r = train::train(train_set, val_set, ndvi_scaler(), tiny_model(), cfg);
	CHECK(r.aborted);
	CHECK(r.abort_reason.find("non-finite") != std::string::npos);
	for (const auto &p : r.best_params.named()) {
		for (double v : p.tensor.values()) {
			CHECK(std::isfinite(v));
		}
	}
}

TEST_CASE("branch switches reach the model config") {
	auto cfg = tiny_train();
	cfg.ablation.future = false;
	cfg.ablation.target = false;
	cfg.use_feature_engineering = false;
	const auto m = effective_model_config(tiny_model(), cfg);
	CHECK_FALSE(m.use_future);
	CHECK_FALSE(m.use_target);
	CHECK_FALSE(m.use_feature_engineering);
	CHECK(m.use_history_covariates);
}

TEST_CASE("train config validation") {
	auto cfg = tiny_train();
	cfg.batch_size = 0;
	CHECK_THROWS_AS(cfg.validate(), ConfigError);
	cfg = tiny_train();
	cfg.lr = -1.0;
	CHECK_THROWS_AS(cfg.validate(), ConfigError);
	CHECK_THROWS_AS(train::train({}, random_samples(1, 2), ndvi_scaler(), tiny_model(), tiny_train()), InsufficientDataError);
}
