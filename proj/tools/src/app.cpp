#include "sqf/cli/app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "sqf/cli/run_config.hpp"
#include "sqf/cli/workflow.hpp"
#include "sqf/core/calendar.hpp"
#include "sqf/core/error.hpp"
#include "sqf/core/log.hpp"
#include "sqf/ingest/synthetic.hpp"
#include "sqf/model/network.hpp"
#include "sqf/pipeline/schema.hpp"

namespace sqf::cli {

namespace fs = std::filesystem;

namespace {

struct Overrides {
	std::string config_path;
	std::optional<std::uint64_t> seed;
	std::optional<unsigned> threads;
	std::optional<std::string> output_dir;
	bool no_perturbation = false;
	bool no_temporal_weights = false;
	bool no_feature_engineering = false;
	std::vector<std::string> ablate_branches;
	bool quantile_sort = false;
};

RunConfig resolve(const Overrides &o) {
	RunConfig c = o.config_path.empty() ? RunConfig{} : load_run_config(o.config_path);
	if (o.config_path.empty()) {
		c.applySeeds();
	}
	if (o.seed) {
		c.seed = *o.seed;
		c.applySeeds();
	}
	if (o.threads) {
		c.threads = *o.threads;
	}
	if (o.output_dir) {
		c.output_dir = *o.output_dir;
	}
	if (o.no_perturbation) {
		c.perturbation.enabled = false;
	}
	if (o.no_temporal_weights) {
		c.train.use_temporal_weights = false;
	}
	if (o.no_feature_engineering) {
		c.train.use_feature_engineering = false;
	}
	for (const auto &b : o.ablate_branches) {
		if (b == "future") {
			c.train.ablation.future = false;
		} else if (b == "history") {
			c.train.ablation.history = false;
		} else if (b == "target") {
			c.train.ablation.target = false;
		}
	}
	if (o.quantile_sort) {
		c.model.quantile_sort = true;
	}
	c.validate();
	return c;
}

log::Level parse_level(const std::string &name) {
	if (name == "debug") return log::Level::debug;
	if (name == "warning") return log::Level::warning;
	if (name == "error") return log::Level::error;
	if (name == "off") return log::Level::off;
	return log::Level::info;
}

fs::path out_path(const RunConfig &c, const std::string &name) { return fs::path(c.output_dir) / name; }

void write_resolved(const RunConfig &c) {
	fs::create_directories(c.output_dir);
	std::ofstream(out_path(c, "config.resolved.toml")) << to_toml(c);
}

template <typename Fn>
void write_file(const fs::path &path, Fn &&fn) {
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw Error("cannot open '" + path.string() + "' for writing");
	}
	fn(out);
}

std::string fixed(double v, int digits = 4) {
	std::ostringstream os;
	os << std::fixed << std::setprecision(digits) << v;
	return os.str();
}

void print_summary(std::ostream &out, const eval::MetricReport &r) {
	out << "windows " << r.samples << ", points " << r.points << '\n'
	    << "rmse " << fixed(r.rmse) << "  mae " << fixed(r.mae) << "  wmape " << fixed(r.wmape) << "  mase "
	    << fixed(r.mase) << '\n'
	    << "crps " << fixed(r.crps) << "  pinball " << fixed(r.mean_pinball) << "  coverage " << fixed(r.coverage, 3)
	    << "  r2 " << fixed(r.r2, 3) << '\n'
	    << "persistence rmse " << fixed(r.persistence.rmse) << "  mae " << fixed(r.persistence.mae) << '\n';
}

// ---- commands -------------------------------------------------------------------------------

int cmd_gen(const RunConfig &c, std::ostream &out) {
	const auto ds = ingest::generate_synthetic(c.synthetic);
	const fs::path dir = out_path(c, "data");
	fs::create_directories(dir);
	ingest::write_targets_csv(dir / "targets.csv", ds.series);
	ingest::write_weather_csv(dir / "weather.csv", ds.weather);
	ingest::write_groups_csv(dir / "groups.csv", ds.groups);
	write_resolved(c);
	out << "wrote " << ds.series.size() << " cubes to " << dir.string() << '\n';
	return kOk;
}

int cmd_prepare(const RunConfig &c, std::ostream &out) {
	const auto data = prepare_data(c, load_dataset(c));
	write_prepared(c, data);
	write_resolved(c);
	out << "train windows " << data.train.samples.size() << ", validation windows " << data.val.samples.size()
	    << ", schema " << pipeline::format_hash(data.train.schema.hash()) << '\n';
	return kOk;
}

int cmd_train(const RunConfig &c, std::ostream &out) {
	const auto data = load_or_prepare(c);
	write_resolved(c);
	const auto outcome = run_training(c, data, [&](const train::EpochRecord &r) {
		log::info("epoch " + std::to_string(r.epoch) + " train " + fixed(r.train_loss, 6) + " val " +
		          fixed(r.val_loss, 6) + " lr " + std::to_string(r.lr));
	});
	write_file(out_path(c, "history.csv"), [&](std::ostream &o) { train::write_history_csv(o, outcome.result.history); });
	model::save_checkpoint(out_path(c, "checkpoint.sqfm"), outcome.checkpoint);
	if (outcome.result.aborted) {
		out << "training aborted: " << outcome.result.abort_reason << "; kept checkpoint from epoch "
		    << outcome.result.best_epoch << '\n';
		return kNumericError;
	}
	out << "best epoch " << outcome.result.best_epoch << ", validation loss " << fixed(outcome.result.best_val_loss, 6)
	    << '\n';
	return kOk;
}

struct ModelInputs {
	model::Checkpoint checkpoint;
	pipeline::SampleSet samples;
	ingest::ClimateGroups groups;
};

ModelInputs load_model_inputs(const RunConfig &c, const std::string &checkpoint_path, const std::string &samples_path) {
	ModelInputs in;
	in.checkpoint = model::load_checkpoint(checkpoint_path.empty() ? out_path(c, "checkpoint.sqfm")
	                                                               : fs::path(checkpoint_path));
	if (samples_path.empty()) {
		auto data = load_or_prepare(c);
		in.samples = std::move(data.val);
		in.groups = std::move(data.groups);
	} else {
		in.samples = pipeline::read_sample_set(samples_path);
		const auto groups_path = prepared_paths(c).groups;
		if (fs::exists(groups_path)) {
			in.groups = ingest::read_groups_csv(groups_path);
		}
	}
	if (in.samples.schema.hash() != in.checkpoint.schema_hash) {
		throw SchemaMismatchError("schema hash mismatch: checkpoint " + pipeline::format_hash(in.checkpoint.schema_hash) +
		                          ", samples " + pipeline::format_hash(in.samples.schema.hash()));
	}
	if (c.model.quantile_sort) {
		in.checkpoint.config.quantile_sort = true;
	}
	return in;
}

int cmd_evaluate(const RunConfig &c, const std::string &checkpoint, const std::string &samples, std::ostream &out) {
	const auto in = load_model_inputs(c, checkpoint, samples);
	write_resolved(c);
	const auto report = run_evaluation(c, in.checkpoint, in.samples, &in.groups);
	write_file(out_path(c, "metrics.json"), [&](std::ostream &o) { eval::write_metrics_json(o, report); });
	write_file(out_path(c, "scatter.csv"), [&](std::ostream &o) { eval::write_scatter_csv(o, report); });
	print_summary(out, report);
	return kOk;
}

int cmd_forecast(const RunConfig &c, const std::string &checkpoint, const std::string &samples,
                 const std::string &output, std::ostream &out) {
	const auto in = load_model_inputs(c, checkpoint, samples);
	write_resolved(c);
	auto scaled = model::predict(in.checkpoint.params, in.checkpoint.config, in.samples.samples, c.eval_batch_size,
	                             c.threads);
	const auto predictions = eval::to_ndvi_units(std::move(scaled), in.checkpoint.scaler);
	const fs::path path = output.empty() ? out_path(c, "forecast.csv") : fs::path(output);
	write_file(path, [&](std::ostream &o) {
		o << "cube_id,last_history_date,target_date,delta_days,q10,q50,q90\n";
		o << std::setprecision(17);
		for (std::size_t i = 0; i < in.samples.samples.size(); ++i) {
			const auto &s = in.samples.samples[i];
			for (std::size_t k = 0; k < s.horizon(); ++k) {
				o << s.cube_id << ',' << format_iso_date(s.last_history_day.day) << ','
				  << format_iso_date(s.target_days[k].day) << ',' << s.delta_days[k] << ','
				  << predictions[i].lower(k) << ',' << predictions[i].median(k) << ',' << predictions[i].upper(k)
				  << '\n';
			}
		}
	});
	out << "wrote " << in.samples.samples.size() << " window forecasts to " << path.string() << '\n';
	return kOk;
}

struct AblationRow {
	std::string label;
	RunConfig config;
};

std::vector<AblationRow> ablation_rows(const RunConfig &base, int table) {
	std::vector<AblationRow> rows;
	if (table == 2) {
		for (bool wk : {false, true}) {
			for (bool ft : {false, true}) {
				RunConfig c = base;
				c.train.use_temporal_weights = wk;
				c.train.use_feature_engineering = ft;
				rows.push_back({std::string("w_k=") + (wk ? "on" : "off") + " ft_eng=" + (ft ? "on" : "off"), c});
			}
		}
		return rows;
	}
	// Table III order: single modalities, pairs, then the full model.
	const bool grid[7][3] = {{true, false, false}, {false, true, false}, {false, false, true}, {true, true, false},
	                         {true, false, true},  {false, true, true},  {true, true, true}};
	for (const auto &g : grid) {
		RunConfig c = base;
		c.train.ablation.target = g[0];
		c.train.ablation.history = g[1];
		c.train.ablation.future = g[2];
		rows.push_back({std::string("target=") + (g[0] ? "on" : "off") + " history=" + (g[1] ? "on" : "off") +
		                    " future=" + (g[2] ? "on" : "off"),
		                c});
	}
	return rows;
}

int cmd_ablate(const RunConfig &c, int table, std::ostream &out) {
	if (table != 2 && table != 3) {
		throw ConfigError("--table: expected 2 or 3");
	}
	const auto data = load_or_prepare(c);
	write_resolved(c);
	std::ostringstream csv;
	csv << "table,temporal_weights,feature_engineering,target,history,future,best_epoch,best_val_loss,rmse,mae,wmape,"
	       "mase,crps,mean_pinball,coverage\n";
	csv << std::setprecision(17);
	int status = kOk;
	for (const auto &row : ablation_rows(c, table)) {
		log::info("ablation run: " + row.label);
		const auto outcome = run_training(row.config, data);
		if (outcome.result.aborted) {
			status = kNumericError;
		}
		const auto r = run_evaluation(row.config, outcome.checkpoint, data.val, &data.groups);
		const auto &t = row.config.train;
		csv << table << ',' << t.use_temporal_weights << ',' << t.use_feature_engineering << ',' << t.ablation.target
		    << ',' << t.ablation.history << ',' << t.ablation.future << ',' << outcome.result.best_epoch << ','
		    << outcome.result.best_val_loss << ',' << r.rmse << ',' << r.mae << ',' << r.wmape << ',' << r.mase << ','
		    << r.crps << ',' << r.mean_pinball << ',' << r.coverage << '\n';
		out << row.label << ": rmse " << fixed(r.rmse) << " mae " << fixed(r.mae) << " crps " << fixed(r.crps)
		    << " pinball " << fixed(r.mean_pinball) << '\n';
	}
	write_file(out_path(c, "ablation.csv"), [&](std::ostream &o) { o << csv.str(); });
	return status;
}

std::vector<std::vector<std::string>> read_csv_rows(const fs::path &path) {
	std::vector<std::vector<std::string>> rows;
	std::ifstream in(path);
	std::string line;
	while (std::getline(in, line)) {
		std::vector<std::string> fields;
		std::stringstream ss(line);
		std::string f;
		while (std::getline(ss, f, ',')) {
			fields.push_back(f);
		}
		rows.push_back(std::move(fields));
	}
	return rows;
}

int cmd_report(const RunConfig &c, std::ostream &out) {
	std::ostringstream md;
	bool any = false;
	const auto metrics_path = out_path(c, "metrics.json");
	if (fs::exists(metrics_path)) {
		any = true;
		std::ifstream in(metrics_path);
		const auto j = nlohmann::json::parse(in);
		md << "## Validation metrics\n\n| metric | model | persistence |\n|---|---|---|\n";
		for (const char *key : {"rmse", "mae", "wmape", "mase"}) {
			const auto &p = j["persistence"];
			md << "| " << key << " | " << (j[key].is_null() ? "n/a" : fixed(j[key].get<double>())) << " | "
			   << (p.contains(key) ? fixed(p[key].get<double>()) : "") << " |\n";
		}
		for (const char *key : {"crps", "mean_pinball", "coverage", "r2", "mean_bias"}) {
			md << "| " << key << " | " << fixed(j[key].get<double>()) << " | |\n";
		}
		if (!j["per_group"].empty()) {
			md << "\n## Per climate group\n\n| group | n | mae | r2 | mean bias |\n|---|---|---|---|---|\n";
			for (const auto &[name, g] : j["per_group"].items()) {
				md << "| " << name << " | " << g["count"].get<std::size_t>() << " | " << fixed(g["mae"].get<double>())
				   << " | " << fixed(g["r2"].get<double>(), 3) << " | " << fixed(g["mean_bias"].get<double>()) << " |\n";
			}
		}
		md << '\n';
	}
	const auto history_path = out_path(c, "history.csv");
	if (fs::exists(history_path)) {
		const auto rows = read_csv_rows(history_path);
		if (rows.size() > 1) {
			any = true;
			std::size_t best = 1;
			for (std::size_t i = 1; i < rows.size(); ++i) {
				if (std::stod(rows[i][2]) < std::stod(rows[best][2])) {
					best = i;
				}
			}
			md << "## Training\n\n" << rows.size() - 1 << " epochs; best validation loss " << rows[best][2]
			   << " at epoch " << rows[best][0] << "; final lr " << rows.back()[3] << "\n\n";
		}
	}
	const auto ablation_path = out_path(c, "ablation.csv");
	if (fs::exists(ablation_path)) {
		const auto rows = read_csv_rows(ablation_path);
		if (rows.size() > 1) {
			any = true;
			auto mark = [](const std::string &v) { return v == "1" ? "yes" : "no"; };
			md << "## Ablation\n\n| w_k | ft-eng | target | history | future | rmse | mae | crps | pinball |\n"
			   << "|---|---|---|---|---|---|---|---|---|\n";
			for (std::size_t i = 1; i < rows.size(); ++i) {
				const auto &r = rows[i];
				md << "| " << mark(r[1]) << " | " << mark(r[2]) << " | " << mark(r[3]) << " | " << mark(r[4]) << " | "
				   << mark(r[5]) << " | " << fixed(std::stod(r[8])) << " | " << fixed(std::stod(r[9])) << " | "
				   << fixed(std::stod(r[12])) << " | " << fixed(std::stod(r[13])) << " |\n";
			}
			md << '\n';
		}
	}
	if (!any) {
		throw InputFormatError("nothing to report in '" + c.output_dir +
		                       "': run evaluate, train or ablate first");
	}
	write_file(out_path(c, "report.md"), [&](std::ostream &o) { o << md.str(); });
	out << md.str();
	return kOk;
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
	CLI::App app{"Probabilistic NDVI forecasting with a dual-branch transformer"};
	app.require_subcommand(1);
	Overrides o;
	app.add_option("--config", o.config_path, "Run configuration (TOML)");
	app.add_option("--seed", o.seed, "Master seed");
	app.add_option("--threads", o.threads, "Worker threads for sample building and inference")
	    ->check(CLI::PositiveNumber);
	app.add_option("--out", o.output_dir, "Output directory (overrides run.output_dir)");
	app.add_flag("--no-perturbation", o.no_perturbation, "Use unperturbed future weather");
	app.add_flag("--no-temporal-weights", o.no_temporal_weights, "Weight all horizon steps equally");
	app.add_flag("--no-feature-engineering", o.no_feature_engineering, "Zero the engineered weather features");
	app.add_option("--ablate-branch", o.ablate_branches, "Disable input branches")
	    ->check(CLI::IsMember({"future", "history", "target"}));
	app.add_flag("--quantile-sort", o.quantile_sort, "Sort quantiles to prevent crossing");
	app.fallthrough();

	auto *gen = app.add_subcommand("gen", "Write a synthetic dataset as CSV");
	auto *prepare = app.add_subcommand("prepare", "Build, scale and cache forecast windows");
	auto *train_cmd = app.add_subcommand("train", "Train and keep the best-validation checkpoint");
	std::string checkpoint;
	std::string samples;
	std::string output;
	auto *evaluate = app.add_subcommand("evaluate", "Metrics of a checkpoint on the validation windows");
	evaluate->add_option("--checkpoint", checkpoint, "Checkpoint (default <out>/checkpoint.sqfm)");
	evaluate->add_option("--samples", samples, "Sample cache (default <out>/val.sqfs)");
	auto *forecast = app.add_subcommand("forecast", "Quantile forecasts for prepared windows");
	forecast->add_option("--checkpoint", checkpoint, "Checkpoint (default <out>/checkpoint.sqfm)");
	forecast->add_option("--samples", samples, "Sample cache (default <out>/val.sqfs)");
	forecast->add_option("--output", output, "CSV path (default <out>/forecast.csv)");
	int table = 0;
	auto *ablate = app.add_subcommand("ablate", "Ablation grids: --table 2 (w_k x ft-eng) or 3 (input branches)");
	ablate->add_option("--table", table, "2 or 3")->required()->check(CLI::IsMember({2, 3}));
	auto *report = app.add_subcommand("report", "Summarize metrics, history and ablation outputs");

	try {
		app.parse(argc, argv);
	} catch (const CLI::CallForHelp &) {
		out << app.help();
		return kOk;
	} catch (const CLI::CallForAllHelp &) {
		out << app.help("", CLI::AppFormatMode::All);
		return kOk;
	} catch (const CLI::ParseError &e) {
		err << "error: " << e.what() << '\n';
		return kConfigError;
	}

	try {
		const RunConfig config = resolve(o);
		log::set_level(parse_level(config.log_level));
		if (gen->parsed()) return cmd_gen(config, out);
		if (prepare->parsed()) return cmd_prepare(config, out);
		if (train_cmd->parsed()) return cmd_train(config, out);
		if (evaluate->parsed()) return cmd_evaluate(config, checkpoint, samples, out);
		if (forecast->parsed()) return cmd_forecast(config, checkpoint, samples, output, out);
		if (ablate->parsed()) return cmd_ablate(config, table, out);
		if (report->parsed()) return cmd_report(config, out);
		return kFailure;
	} catch (const ConfigError &e) {
		err << "config error: " << e.what() << '\n';
		return kConfigError;
	} catch (const NumericError &e) {
		err << "numeric error: " << e.what() << '\n';
		return kNumericError;
	} catch (const ShapeError &e) {
		err << "error: " << e.what() << '\n';
		return kFailure;
	} catch (const Error &e) {
		err << "data error: " << e.what() << '\n';
		return kDataError;
	} catch (const std::exception &e) {
		err << "error: " << e.what() << '\n';
		return kFailure;
	}
}

} // namespace sqf::cli
