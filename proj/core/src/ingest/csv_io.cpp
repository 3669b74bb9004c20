#include "sqf/ingest/csv_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "csv_util.hpp"
#include "sqf/core/log.hpp"
#include "sqf/core/validate.hpp"

namespace sqf::ingest {

namespace {

constexpr std::string_view kTargetsHeader = "cube_id,date,ndvi,observed";
constexpr std::string_view kWeatherHeader = "cube_id,date,wind,humidity,radiation,rainfall,pressure,temperature";
constexpr std::string_view kPixelsHeader = "cube_id,date,row,col,b02,b03,b04,b8a,cloud";
constexpr std::string_view kGroupsHeader = "cube_id,koppen_group";

EpochDay parse_date(std::string_view field, std::size_t line) {
	try {
		return parse_iso_date(field);
	} catch (const InputFormatError &e) {
		throw InputFormatError(e.what(), line);
	}
}

/// Preserves first-appearance order of cube ids.
template <typename T>
struct Grouped {
	std::vector<std::string> order;
	std::map<std::string, std::vector<std::pair<std::size_t, T>>> rows;

	void add(const std::string &id, std::size_t line, T value) {
		auto [it, inserted] = rows.try_emplace(id);
		if (inserted) {
			order.push_back(id);
		}
		it->second.emplace_back(line, std::move(value));
	}
};

std::ofstream open_out(const std::filesystem::path &path) {
	if (path.has_parent_path()) {
		std::filesystem::create_directories(path.parent_path());
	}
	std::ofstream out(path, std::ios::binary);
	if (!out) {
		throw InputFormatError("cannot write '" + path.string() + "'");
	}
	return out;
}

} // namespace

std::vector<ObservationSeries> parse_targets_csv(const std::string &text) {
	Grouped<ObservationPoint> grouped;
	detail::for_each_row(text, kTargetsHeader, [&](std::size_t line, const std::vector<std::string_view> &f) {
		if (f[0].empty()) {
			throw InputFormatError("empty cube_id", line);
		}
		ObservationPoint pt;
		pt.timestamp = TimeStamp{parse_date(f[1], line)};
		pt.observed = detail::parse_bool(f[3], line, "observed");
		if (pt.observed) {
			double v = detail::parse_double(f[2], line, "ndvi");
			if (v < -1.0 || v > 1.0) {
				log::warning("line " + std::to_string(line) + ": NDVI " + std::string(f[2]) +
				             " outside [-1, 1], clamped");
				v = std::clamp(v, -1.0, 1.0);
			}
			pt.value = v;
		} else if (!f[2].empty()) {
			throw InputFormatError("ndvi must be empty when observed is false", line);
		}
		grouped.add(std::string(f[0]), line, pt);
	});

	std::vector<ObservationSeries> out;
	for (const auto &id : grouped.order) {
		ObservationSeries series;
		series.cube_id = id;
		const auto &rows = grouped.rows[id];
		for (const auto &[line, pt] : rows) {
			series.points.push_back(pt);
		}
		const auto violations = validate_series(series);
		if (!violations.empty()) {
			const auto &v = violations.front();
			throw ValidationError("line " + std::to_string(rows[v.index].first) + ": cube '" + id + "': " + v.rule);
		}
		out.push_back(std::move(series));
	}
	return out;
}

std::vector<DailyWeather> parse_weather_csv(const std::string &text) {
	Grouped<std::pair<EpochDay, WeatherRow>> grouped;
	detail::for_each_row(text, kWeatherHeader, [&](std::size_t line, const std::vector<std::string_view> &f) {
		if (f[0].empty()) {
			throw InputFormatError("empty cube_id", line);
		}
		WeatherRow row;
		for (std::size_t v = 0; v < kWeatherVariables; ++v) {
			row.values[v] = detail::parse_double(f[2 + v], line, kWeatherNames[v]);
		}
		const double hum = row[WeatherVariable::humidity];
		if (hum < 0.0 || hum > 100.0) {
			throw ValidationError("line " + std::to_string(line) + ": humidity outside [0, 100]");
		}
		if (row.rainfall() < 0.0) {
			throw ValidationError("line " + std::to_string(line) + ": negative rainfall");
		}
		grouped.add(std::string(f[0]), line, {parse_date(f[1], line), row});
	});

	std::vector<DailyWeather> out;
	for (const auto &id : grouped.order) {
		auto rows = grouped.rows[id];
		std::stable_sort(rows.begin(), rows.end(),
		                 [](const auto &a, const auto &b) { return a.second.first < b.second.first; });
		DailyWeather weather;
		weather.cube_id = id;
		weather.start = TimeStamp{rows.front().second.first};
		for (std::size_t i = 0; i < rows.size(); ++i) {
			const EpochDay day = rows[i].second.first;
			if (i > 0) {
				const EpochDay prev = rows[i - 1].second.first;
				if (day == prev) {
					throw ValidationError("line " + std::to_string(rows[i].first) + ": duplicate weather day " +
					                      format_iso_date(day) + " for cube '" + id + "'");
				}
				if (day != prev + 1) {
					throw ValidationError("weather gap for cube '" + id + "': missing day " +
					                      format_iso_date(prev + 1));
				}
			}
			weather.rows.push_back(rows[i].second.second);
		}
		out.push_back(std::move(weather));
	}
	return out;
}

std::vector<PixelRecord> parse_pixels_csv(const std::string &text) {
	std::vector<PixelRecord> out;
	detail::for_each_row(text, kPixelsHeader, [&](std::size_t line, const std::vector<std::string_view> &f) {
		PixelRecord px;
		px.cube_id = std::string(f[0]);
		px.day = TimeStamp{parse_date(f[1], line)};
		px.row = static_cast<int>(detail::parse_int(f[2], line, "row"));
		px.col = static_cast<int>(detail::parse_int(f[3], line, "col"));
		px.b02 = detail::parse_double(f[4], line, "b02");
		px.b03 = detail::parse_double(f[5], line, "b03");
		px.b04 = detail::parse_double(f[6], line, "b04");
		px.b8a = detail::parse_double(f[7], line, "b8a");
		px.cloud = detail::parse_bool(f[8], line, "cloud");
		if (px.b02 < 0 || px.b03 < 0 || px.b04 < 0 || px.b8a < 0) {
			throw ValidationError("line " + std::to_string(line) + ": negative reflectance");
		}
		if (px.row < 0 || px.col < 0) {
			throw ValidationError("line " + std::to_string(line) + ": negative pixel coordinate");
		}
		out.push_back(std::move(px));
	});
	return out;
}

ClimateGroups parse_groups_csv(const std::string &text) {
	ClimateGroups out;
	detail::for_each_row(text, kGroupsHeader, [&](std::size_t line, const std::vector<std::string_view> &f) {
		if (f[0].empty() || f[1].empty()) {
			throw InputFormatError("empty cube_id or group", line);
		}
		out[std::string(f[0])] = std::string(f[1]);
	});
	return out;
}

std::vector<ObservationSeries> read_targets_csv(const std::filesystem::path &path) {
	return parse_targets_csv(detail::read_file(path));
}

std::vector<DailyWeather> read_weather_csv(const std::filesystem::path &path) {
	return parse_weather_csv(detail::read_file(path));
}

std::vector<PixelRecord> read_pixels_csv(const std::filesystem::path &path) {
	return parse_pixels_csv(detail::read_file(path));
}

ClimateGroups read_groups_csv(const std::filesystem::path &path) { return parse_groups_csv(detail::read_file(path)); }

void write_targets_csv(const std::filesystem::path &path, std::span<const ObservationSeries> series) {
	auto out = open_out(path);
	out << kTargetsHeader << '\n';
	for (const auto &s : series) {
		for (const auto &pt : s.points) {
			out << s.cube_id << ',' << format_iso_date(pt.timestamp.day) << ',';
			if (pt.observed && pt.value) {
				out << detail::format_double(*pt.value);
			}
			out << ',' << (pt.observed ? 1 : 0) << '\n';
		}
	}
}

void write_weather_csv(const std::filesystem::path &path, std::span<const DailyWeather> weather) {
	auto out = open_out(path);
	out << kWeatherHeader << '\n';
	for (const auto &w : weather) {
		for (std::size_t i = 0; i < w.rows.size(); ++i) {
			out << w.cube_id << ',' << format_iso_date(w.start.day + static_cast<EpochDay>(i));
			for (double v : w.rows[i].values) {
				out << ',' << detail::format_double(v);
			}
			out << '\n';
		}
	}
}

void write_pixels_csv(const std::filesystem::path &path, std::span<const PixelRecord> pixels) {
	auto out = open_out(path);
	out << kPixelsHeader << '\n';
	for (const auto &px : pixels) {
		out << px.cube_id << ',' << format_iso_date(px.day.day) << ',' << px.row << ',' << px.col << ','
		    << detail::format_double(px.b02) << ',' << detail::format_double(px.b03) << ','
		    << detail::format_double(px.b04) << ',' << detail::format_double(px.b8a) << ',' << (px.cloud ? 1 : 0)
		    << '\n';
	}
}

void write_groups_csv(const std::filesystem::path &path, const ClimateGroups &groups) {
	auto out = open_out(path);
	out << kGroupsHeader << '\n';
	for (const auto &[id, group] : groups) {
		out << id << ',' << group << '\n';
	}
}

} // namespace sqf::ingest
