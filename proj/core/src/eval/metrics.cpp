#include "sqf/eval/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sqf/core/numeric.hpp"
#include "sqf/train/loss.hpp"

namespace sqf::eval {

namespace {

void check_pair(std::span<const double> y, std::span<const double> y_hat) {
	if (y.empty() || y.size() != y_hat.size()) {
		throw std::invalid_argument("metric inputs must be non-empty and of equal length (" + std::to_string(y.size()) +
		                            " vs " + std::to_string(y_hat.size()) + ")");
	}
}

} // namespace

PointMetrics point_metrics(std::span<const double> y, std::span<const double> y_hat) {
	check_pair(y, y_hat);
	CompensatedSum sq;
	CompensatedSum abs_err;
	CompensatedSum abs_y;
	for (std::size_t i = 0; i < y.size(); ++i) {
		const double e = y[i] - y_hat[i];
		sq.add(e * e);
		abs_err.add(std::abs(e));
		abs_y.add(std::abs(y[i]));
	}
	const double n = static_cast<double>(y.size());
	PointMetrics m;
	m.rmse = std::sqrt(sq.value() / n);
	m.mae = abs_err.value() / n;
	m.wmape_defined = abs_y.value() > 0.0;
	m.wmape = m.wmape_defined ? abs_err.value() / abs_y.value() : 0.0;
	return m;
}

double naive_scale(std::span<const double> history) {
	if (history.size() < 2) {
		return 0.0;
	}
	double total = 0.0;
	for (std::size_t i = 1; i < history.size(); ++i) {
		total += std::abs(history[i] - history[i - 1]);
	}
	return total / static_cast<double>(history.size() - 1);
}

MaseResult mase(std::span<const MaseSample> samples) {
	MaseResult r;
	CompensatedSum total;
	for (const auto &s : samples) {
		const double scale = naive_scale(s.history);
		if (s.history.size() < 2 || !(scale > 0.0) || s.truth.empty()) {
			++r.excluded;
			continue;
		}
		check_pair(s.truth, s.prediction);
		double err = 0.0;
		for (std::size_t k = 0; k < s.truth.size(); ++k) {
			err += std::abs(s.truth[k] - s.prediction[k]);
		}
		total.add(err / static_cast<double>(s.truth.size()) / scale);
		++r.used;
	}
	r.value = r.used > 0 ? total.value() / static_cast<double>(r.used) : 0.0;
	return r;
}

double crps_from_quantiles(double y, std::span<const double> quantile_values, std::span<const double> levels) {
	if (quantile_values.size() != levels.size() || levels.empty()) {
		throw std::invalid_argument("crps_from_quantiles: quantile values and levels differ in length");
	}
	double total = 0.0;
	for (std::size_t q = 0; q < levels.size(); ++q) {
		total += train::pinball(y, quantile_values[q], levels[q]);
	}
	return 2.0 * total / static_cast<double>(levels.size());
}

double r_squared(std::span<const double> y, std::span<const double> y_hat) {
	check_pair(y, y_hat);
	CompensatedSum mean;
	for (double v : y) {
		mean.add(v);
	}
	const double mu = mean.value() / static_cast<double>(y.size());
	CompensatedSum sse;
	CompensatedSum sst;
	for (std::size_t i = 0; i < y.size(); ++i) {
		sse.add((y[i] - y_hat[i]) * (y[i] - y_hat[i]));
		sst.add((y[i] - mu) * (y[i] - mu));
	}
	return sst.value() > 0.0 ? 1.0 - sse.value() / sst.value() : 0.0;
}

double mean_bias(std::span<const double> y, std::span<const double> y_hat) {
	check_pair(y, y_hat);
	CompensatedSum total;
	for (std::size_t i = 0; i < y.size(); ++i) {
		total.add(y_hat[i] - y[i]);
	}
	return total.value() / static_cast<double>(y.size());
}

double newey_west_variance(std::span<const double> d, std::size_t lag) {
	const std::size_t n = d.size();
	double mean = 0.0;
	for (double v : d) {
		mean += v;
	}
	mean /= static_cast<double>(n);
	auto autocov = [&](std::size_t k) {
		double total = 0.0;
		for (std::size_t t = k; t < n; ++t) {
			total += (d[t] - mean) * (d[t - k] - mean);
		}
		return total / static_cast<double>(n);
	};
	double v = autocov(0);
	for (std::size_t k = 1; k <= lag && k < n; ++k) {
		v += 2.0 * (1.0 - static_cast<double>(k) / static_cast<double>(lag + 1)) * autocov(k);
	}
	return v;
}

DieboldMarianoResult diebold_mariano(std::span<const double> loss_a, std::span<const double> loss_b, std::size_t lag) {
	if (loss_a.size() != loss_b.size()) {
		throw std::invalid_argument("diebold_mariano: loss series differ in length");
	}
	const std::size_t n = loss_a.size();
	if (n < lag + 2) {
		throw std::invalid_argument("diebold_mariano: need at least lag + 2 = " + std::to_string(lag + 2) +
		                            " observations, got " + std::to_string(n));
	}
	std::vector<double> d(n);
	bool all_zero = true;
	double mean = 0.0;
	double mean_sq = 0.0;
	for (std::size_t i = 0; i < n; ++i) {
		d[i] = loss_a[i] - loss_b[i];
		all_zero = all_zero && d[i] == 0.0;
		mean += d[i];
		mean_sq += d[i] * d[i];
	}
	mean /= static_cast<double>(n);
	mean_sq /= static_cast<double>(n);

	DieboldMarianoResult r;
	r.mean_difference = mean;
	if (all_zero) {
		return r;
	}
	r.long_run_variance = newey_west_variance(d, lag);
	// Round-off leaves a tiny positive variance for a constant series.
	if (!(r.long_run_variance > 1e-20 * mean_sq)) {
		r.degenerate = true;
		r.statistic = std::nan("");
		r.p_value = std::nan("");
		return r;
	}
	r.statistic = mean / std::sqrt(r.long_run_variance / static_cast<double>(n));
	r.p_value = std::erfc(std::abs(r.statistic) / std::sqrt(2.0));
	return r;
}

} // namespace sqf::eval
