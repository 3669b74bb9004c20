#include <random>

#include <benchmark/benchmark.h>

#include "sqf/diff/ops.hpp"
#include "sqf/model/network.hpp"
#include "sqf/pipeline/features.hpp"

namespace {

using namespace sqf;

diff::Tensor random_tensor(diff::Shape shape, std::mt19937_64 &rng) {
	std::normal_distribution<double> normal(0.0, 1.0);
	std::size_t n = 1;
	for (auto s : shape) {
		n *= s;
	}
	std::vector<double> v(n);
	for (auto &x : v) {
		x = normal(rng);
	}
	return diff::Tensor::from(std::move(shape), std::move(v));
}

void BM_Matmul(benchmark::State &state) {
	const auto n = static_cast<std::size_t>(state.range(0));
	std::mt19937_64 rng(1);
	auto a = random_tensor({n, n}, rng);
	auto b = random_tensor({n, n}, rng);
	diff::NoGradGuard guard;
	for (auto _ : state) {
		benchmark::DoNotOptimize(diff::matmul(a, b).values().data());
	}
	state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128)->Arg(256);

ForecastSample make_sample(std::mt19937_64 &rng, std::size_t p, std::size_t h, std::size_t fh, std::size_t ff) {
	std::normal_distribution<double> normal(0.0, 1.0);
	ForecastSample s;
	s.history_tokens = Matrix(p, fh);
	for (auto &v : s.history_tokens.data) {
		v = normal(rng);
	}
	s.future_tokens = Matrix(5 * h, ff);
	for (auto &v : s.future_tokens.data) {
		v = normal(rng);
	}
	s.history_mask.assign(p, 1);
	s.history_bt_valid.assign(p, 1);
	s.future_mask.assign(5 * h, 1);
	for (std::size_t k = 0; k < h; ++k) {
		s.selection_indices.push_back(5 * k + 4);
		s.targets.push_back(0.5);
		s.delta_days.push_back(5.0 * static_cast<double>(k + 1));
	}
	return s;
}

void BM_Forward(benchmark::State &state) {
	model::ModelConfig config;
	config.d_model = static_cast<std::size_t>(state.range(0));
	config.n_layers = static_cast<std::size_t>(state.range(1));
	config.ffn_dim = 4 * config.d_model;
	std::mt19937_64 rng(2);
	std::vector<ForecastSample> samples;
	for (int i = 0; i < 8; ++i) {
		samples.push_back(make_sample(rng, 3, 3, config.history_width, config.future_width));
	}
	const auto params = model::init_params(config, 7);
	const auto batch = model::make_batch(samples);
	diff::NoGradGuard guard;
	for (auto _ : state) {
		model::ForwardContext ctx;
		benchmark::DoNotOptimize(model::forward(params, config, batch, ctx).values().data());
	}
	state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_Forward)->Args({32, 2})->Args({128, 8});

void BM_RollingFeatures(benchmark::State &state) {
	std::mt19937_64 rng(3);
	std::uniform_real_distribution<double> unit(0.0, 1.0);
	DailyWeather w;
	w.start = TimeStamp{18000};
	for (int i = 0; i < 730; ++i) {
		WeatherRow row;
		row.values[3] = 10.0 * unit(rng);
		row.values[5] = 40.0 * unit(rng) - 5.0;
		w.rows.push_back(row);
	}
	for (auto _ : state) {
		for (EpochDay d = 18030; d < 18730; ++d) {
			benchmark::DoNotOptimize(pipeline::rolling_features(w, TimeStamp{d}, 30));
		}
	}
	state.SetItemsProcessed(state.iterations() * 700);
}
BENCHMARK(BM_RollingFeatures);

} // namespace
BENCHMARK_MAIN();
