#include "sqf/cli/run_config.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>
#include <type_traits>

#include "sqf/cli/toml.hpp"
#include "sqf/core/error.hpp"
#include "sqf/core/seed.hpp"

namespace sqf::cli {

namespace {

/// Single field list shared by the reader, the writer and the fingerprint.
template <typename Visitor>
void visit_fields(RunConfig &c, Visitor &v) {
	v.table("run");
	v.field("seed", c.seed);
	v.field("threads", c.threads);
	v.field("output_dir", c.output_dir);
	v.field("log_level", c.log_level);

	v.table("data");
	v.field("targets", c.data.targets);
	v.field("weather", c.data.weather);
	v.field("pixels", c.data.pixels);
	v.field("groups", c.data.groups);

	v.table("split");
	v.field("train_years", c.split.train_years);
	v.field("val_years", c.split.val_years);

	v.table("synthetic");
	v.field("n_cubes", c.synthetic.n_cubes);
	v.field("n_days", c.synthetic.n_days);
	v.field("seasonal_amplitude", c.synthetic.seasonal_amplitude);
	v.field("weather_coupling", c.synthetic.weather_coupling);
	v.field("cloud_probability", c.synthetic.cloud_probability);
	v.field("first_year", c.synthetic.first_year);
	v.field("n_years", c.synthetic.n_years);

	v.table("pipeline");
	v.field("history", c.pipeline.history);
	v.field("horizon", c.pipeline.horizon);
	v.field("shift", c.pipeline.shift);
	v.field("interpolate", c.pipeline.interpolate);

	v.table("perturbation");
	v.field("enabled", c.perturbation.enabled);
	v.field("base_noise", c.perturbation.base_noise);
	v.field("target_g_last", c.perturbation.target_g_last);

	v.table("model");
	v.field("d_model", c.model.d_model);
	v.field("n_layers", c.model.n_layers);
	v.field("n_heads", c.model.n_heads);
	v.field("ffn_dim", c.model.ffn_dim);
	v.field("dropout", c.model.dropout);
	v.field("quantile_sort", c.model.quantile_sort);

	v.table("train");
	v.field("epochs", c.train.epochs);
	v.field("batch_size", c.train.batch_size);
	v.field("lr", c.train.lr);
	v.field("lr_factor", c.train.lr_factor);
	v.field("lr_patience", c.train.lr_patience);
	v.field("lr_min", c.train.lr_min);
	v.field("alpha", c.train.alpha);
	v.field("use_temporal_weights", c.train.use_temporal_weights);
	v.field("use_feature_engineering", c.train.use_feature_engineering);
	v.field("use_future", c.train.ablation.future);
	v.field("use_history", c.train.ablation.history);
	v.field("use_target", c.train.ablation.target);

	v.table("eval");
	v.field("batch_size", c.eval_batch_size);
}

class Reader {
public:
	explicit Reader(const toml::Document &doc) : doc_(doc) {}

	void table(const std::string &name) {
		name_ = name;
		current_ = doc_.find(name);
		known_tables_.insert(name);
	}

	template <typename T>
	void field(const std::string &key, T &target) {
		known_keys_.insert(name_ + "." + key);
		if (current_ == nullptr) {
			return;
		}
		const toml::Value *v = current_->find(key);
		if (v == nullptr) {
			return;
		}
		assign(*v, key, target);
	}

	void finish() const {
		for (const auto &t : doc_.tables) {
			if (t.name.empty()) {
				if (!t.entries.empty()) {
					fail(t.entries.front().value.line, t.entries.front().key, "keys must belong to a [table]");
				}
				continue;
			}
			if (!known_tables_.count(t.name)) {
				throw ConfigError("line " + std::to_string(t.line) + ": unknown table [" + t.name + "]");
			}
			for (const auto &e : t.entries) {
				if (!known_keys_.count(t.name + "." + e.key)) {
					throw ConfigError(t.name + "." + e.key + " (line " + std::to_string(e.value.line) + "): unknown key");
				}
			}
		}
	}

private:
	[[noreturn]] void fail(int line, const std::string &key, const std::string &why) const {
		throw ConfigError(name_ + "." + key + " (line " + std::to_string(line) + "): " + why);
	}

	void assign(const toml::Value &v, const std::string &key, std::string &target) {
		if (v.kind != toml::Value::Kind::string) {
			fail(v.line, key, std::string("expected a string, got ") + v.kindName());
		}
		target = v.text;
	}

	void assign(const toml::Value &v, const std::string &key, bool &target) {
		if (v.kind != toml::Value::Kind::boolean) {
			fail(v.line, key, std::string("expected a boolean, got ") + v.kindName());
		}
		target = v.boolean;
	}

	void assign(const toml::Value &v, const std::string &key, double &target) {
		if (v.kind == toml::Value::Kind::floating) {
			target = v.floating;
		} else if (v.kind == toml::Value::Kind::integer) {
			target = static_cast<double>(v.integer);
		} else {
			fail(v.line, key, std::string("expected a number, got ") + v.kindName());
		}
	}

	template <typename T>
	    requires std::is_integral_v<T>
	void assign(const toml::Value &v, const std::string &key, T &target) {
		if (v.kind != toml::Value::Kind::integer) {
			fail(v.line, key, std::string("expected an integer, got ") + v.kindName());
		}
		if constexpr (std::is_unsigned_v<T>) {
			if (v.integer < 0) {
				fail(v.line, key, "must be non-negative");
			}
			if (static_cast<std::uint64_t>(v.integer) > std::numeric_limits<T>::max()) {
				fail(v.line, key, "out of range");
			}
		} else {
			if (v.integer < std::numeric_limits<T>::min() || v.integer > std::numeric_limits<T>::max()) {
				fail(v.line, key, "out of range");
			}
		}
		target = static_cast<T>(v.integer);
	}

	void assign(const toml::Value &v, const std::string &key, std::vector<int> &target) {
		if (v.kind != toml::Value::Kind::array) {
			fail(v.line, key, std::string("expected an array of integers, got ") + v.kindName());
		}
		target.clear();
		for (const auto &item : v.items) {
			int x = 0;
			assign(item, key, x);
			target.push_back(x);
		}
	}

	const toml::Document &doc_;
	const toml::Table *current_ = nullptr;
	std::string name_;
	std::set<std::string> known_tables_;
	std::set<std::string> known_keys_;
};

class Writer {
public:
	explicit Writer(std::set<std::string> only = {}) : only_(std::move(only)) {}

	void table(const std::string &name) {
		enabled_ = only_.empty() || only_.count(name) > 0;
		if (enabled_) {
			out_ << (first_ ? "" : "\n") << '[' << name << "]\n";
			first_ = false;
		}
	}

	template <typename T>
	void field(const std::string &key, const T &value) {
		if (enabled_) {
			out_ << key << " = " << render(value) << '\n';
		}
	}

	std::string str() const { return out_.str(); }

private:
	static std::string render(const std::string &v) { return toml::quote(v); }
	static std::string render(bool v) { return v ? "true" : "false"; }
	static std::string render(double v) { return toml::format_float(v); }
	template <typename T>
	    requires std::is_integral_v<T>
	static std::string render(T v) {
		return std::to_string(v);
	}
	static std::string render(const std::vector<int> &v) {
		std::string s = "[";
		for (std::size_t i = 0; i < v.size(); ++i) {
			s += (i ? ", " : "") + std::to_string(v[i]);
		}
		return s + "]";
	}

	std::set<std::string> only_;
	bool enabled_ = true;
	bool first_ = true;
	std::ostringstream out_;
};

} // namespace

void RunConfig::applySeeds() {
	synthetic.rng_seed = derive_seed(seed, "synthetic", 0);
	perturbation.rng_seed = derive_seed(seed, "perturbation", 0);
	train.rng_seed = derive_seed(seed, "train", 0);
}

void RunConfig::validate() const {
	if (threads == 0) {
		throw ConfigError("run.threads: must be >= 1");
	}
	static const std::set<std::string> levels{"debug", "info", "warning", "error", "off"};
	if (!levels.count(log_level)) {
		throw ConfigError("run.log_level: expected one of debug, info, warning, error, off");
	}
	if (output_dir.empty()) {
		throw ConfigError("run.output_dir: must not be empty");
	}
	if (!data.targets.empty() && !data.pixels.empty()) {
		throw ConfigError("data.pixels: give either targets or pixels, not both");
	}
	if ((!data.targets.empty() || !data.pixels.empty()) && data.weather.empty()) {
		throw ConfigError("data.weather: required when reading targets or pixels from files");
	}
	if (split.train_years.empty()) {
		throw ConfigError("split.train_years: must not be empty");
	}
	if (split.val_years.empty()) {
		throw ConfigError("split.val_years: must not be empty");
	}
	for (int y : split.train_years) {
		if (std::find(split.val_years.begin(), split.val_years.end(), y) != split.val_years.end()) {
			throw ConfigError("split: year " + std::to_string(y) + " is in both train_years and val_years");
		}
	}
	synthetic.validate();
	pipeline.validate();
	perturbation.validate();
	model.validate();
	train.validate();
	if (eval_batch_size == 0) {
		throw ConfigError("eval.batch_size: must be positive");
	}
}

namespace {

RunConfig from_document(const toml::Document &doc) {
	RunConfig config;
	Reader reader(doc);
	visit_fields(config, reader);
	reader.finish();
	config.applySeeds();
	config.validate();
	return config;
}

} // namespace

RunConfig parse_run_config(const std::string &text, const std::string &source) {
	return from_document(toml::parse(text, source));
}

RunConfig load_run_config(const std::string &path) { return from_document(toml::parse_file(path)); }

std::string to_toml(const RunConfig &config) {
	RunConfig copy = config;
	Writer writer;
	visit_fields(copy, writer);
	return writer.str();
}

std::uint64_t data_fingerprint(const RunConfig &config) {
	RunConfig copy = config;
	Writer writer({"data", "split", "synthetic", "pipeline", "perturbation"});
	visit_fields(copy, writer);
	return fnv1a(writer.str() + "seed=" + std::to_string(config.seed));
}

} // namespace sqf::cli
