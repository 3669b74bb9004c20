#include "sqf/pipeline/sample_cache.hpp"

#include <fstream>

#include "sqf/core/binary_io.hpp"

namespace sqf::pipeline {

namespace {

void write_features(binary::Writer &w, const std::vector<Feature> &features) {
	for (const auto &f : features) {
		w.string(f.name);
		w.u8(static_cast<std::uint8_t>(f.role));
	}
}

std::vector<Feature> read_features(binary::Reader &r, std::size_t n) {
	std::vector<Feature> out;
	for (std::size_t i = 0; i < n; ++i) {
		Feature f;
		f.name = r.string();
		const auto role = r.u8();
		if (role > static_cast<std::uint8_t>(FeatureRole::cyclical)) {
			throw InputFormatError(r.context() + ": unknown feature role");
		}
		f.role = static_cast<FeatureRole>(role);
		out.push_back(std::move(f));
	}
	return out;
}

void write_mask(binary::Writer &w, const Mask &m) {
	for (auto v : m) {
		w.u8(v);
	}
}

Mask read_mask(binary::Reader &r, std::size_t n) {
	Mask m(n);
	for (auto &v : m) {
		v = r.u8();
	}
	return m;
}

} // namespace

void write_sample_set(const std::filesystem::path &path, const SampleSet &set) {
	if (path.has_parent_path()) {
		std::filesystem::create_directories(path.parent_path());
	}
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw InputFormatError("cannot write '" + path.string() + "'");
	}
	binary::Writer w(out);
	const auto &schema = set.schema;
	w.bytes("SQF1", 4);
	w.u64(schema.hash());
	w.u32(static_cast<std::uint32_t>(schema.history_length));
	w.u32(static_cast<std::uint32_t>(schema.horizon));
	w.u32(static_cast<std::uint32_t>(schema.historyWidth()));
	w.u32(static_cast<std::uint32_t>(schema.futureWidth()));
	w.u64(set.samples.size());
	write_features(w, schema.history);
	write_features(w, schema.future);

	w.u32(static_cast<std::uint32_t>(set.scaler.size()));
	for (std::size_t i = 0; i < set.scaler.size(); ++i) {
		w.string(set.scaler.names[i]);
		w.f64(set.scaler.variables[i].mu);
		w.f64(set.scaler.variables[i].sigma2);
		w.f64(set.scaler.variables[i].eps);
	}

	for (const auto &s : set.samples) {
		if (s.history_tokens.rows != schema.history_length || s.targets.size() != schema.horizon ||
		    s.history_tokens.cols != schema.historyWidth() || s.future_tokens.cols != schema.futureWidth()) {
			throw ShapeError("sample of cube '" + s.cube_id + "' does not match the cache schema");
		}
		w.string(s.cube_id);
		w.f64s(s.history_tokens.data);
		write_mask(w, s.history_mask);
		write_mask(w, s.history_bt_valid);
		w.f64s(s.history_targets);
		for (const auto &d : s.history_days) {
			w.i64(d.day);
		}
		w.u32(static_cast<std::uint32_t>(s.future_tokens.rows));
		w.f64s(s.future_tokens.data);
		write_mask(w, s.future_mask);
		for (auto idx : s.selection_indices) {
			w.u32(static_cast<std::uint32_t>(idx));
		}
		w.f64s(s.targets);
		for (const auto &d : s.target_days) {
			w.i64(d.day);
		}
		w.i64(s.last_history_day.day);
		w.f64s(s.delta_days);
	}
	if (!out) {
		throw InputFormatError("failed writing '" + path.string() + "'");
	}
}

SampleSet read_sample_set(const std::filesystem::path &path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw InputFormatError("cannot open '" + path.string() + "'");
	}
	binary::Reader r(in, path.string());
	r.expect_magic("SQF1");
	SampleSet set;
	const auto hash = r.u64();
	const std::size_t p = r.u32();
	const std::size_t h = r.u32();
	const std::size_t fh = r.u32();
	const std::size_t ff = r.u32();
	const auto count = r.u64();
	set.schema.history_length = p;
	set.schema.horizon = h;
	set.schema.history = read_features(r, fh);
	set.schema.future = read_features(r, ff);
	if (set.schema.hash() != hash) {
		throw SchemaMismatchError(path.string() + ": stored schema hash " + format_hash(hash) +
		                          " does not match its feature list (" + format_hash(set.schema.hash()) + ")");
	}
	const auto n_scalers = r.u32();
	for (std::uint32_t i = 0; i < n_scalers; ++i) {
		set.scaler.names.push_back(r.string());
		VariableScaler v;
		v.mu = r.f64();
		v.sigma2 = r.f64();
		v.eps = r.f64();
		set.scaler.variables.push_back(v);
	}
	set.samples.reserve(static_cast<std::size_t>(count));
	for (std::uint64_t n = 0; n < count; ++n) {
		ForecastSample s;
		s.cube_id = r.string();
		s.history_tokens = Matrix(p, fh);
		s.history_tokens.data = r.f64s(p * fh);
		s.history_mask = read_mask(r, p);
		s.history_bt_valid = read_mask(r, p);
		s.history_targets = r.f64s(p);
		for (std::size_t k = 0; k < p; ++k) {
			s.history_days.push_back(TimeStamp{r.i64()});
		}
		const std::size_t length = r.u32();
		s.future_tokens = Matrix(length, ff);
		s.future_tokens.data = r.f64s(length * ff);
		s.future_mask = read_mask(r, length);
		for (std::size_t k = 0; k < h; ++k) {
			s.selection_indices.push_back(r.u32());
		}
		s.targets = r.f64s(h);
		for (std::size_t k = 0; k < h; ++k) {
			s.target_days.push_back(TimeStamp{r.i64()});
		}
		s.last_history_day = TimeStamp{r.i64()};
		s.delta_days = r.f64s(h);
		set.samples.push_back(std::move(s));
	}
	return set;
}

} // namespace sqf::pipeline
