#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sqf/core/types.hpp"
#include "sqf/ingest/ndvi.hpp"

namespace sqf::ingest {

using ClimateGroups = std::map<std::string, std::string>;

// Readers throw InputFormatError (with line numbers) on malformed rows and
// ValidationError on invariant violations such as weather gaps.

/// `cube_id,date,ndvi,observed`; ndvi empty when observed is false.
std::vector<ObservationSeries> read_targets_csv(const std::filesystem::path &path);
/// `cube_id,date,wind,humidity,radiation,rainfall,pressure,temperature`.
std::vector<DailyWeather> read_weather_csv(const std::filesystem::path &path);
/// `cube_id,date,row,col,b02,b03,b04,b8a,cloud`.
std::vector<PixelRecord> read_pixels_csv(const std::filesystem::path &path);
/// `cube_id,koppen_group`.
ClimateGroups read_groups_csv(const std::filesystem::path &path);

std::vector<ObservationSeries> parse_targets_csv(const std::string &text);
std::vector<DailyWeather> parse_weather_csv(const std::string &text);
std::vector<PixelRecord> parse_pixels_csv(const std::string &text);
ClimateGroups parse_groups_csv(const std::string &text);

void write_targets_csv(const std::filesystem::path &path, std::span<const ObservationSeries> series);
void write_weather_csv(const std::filesystem::path &path, std::span<const DailyWeather> weather);
void write_pixels_csv(const std::filesystem::path &path, std::span<const PixelRecord> pixels);
void write_groups_csv(const std::filesystem::path &path, const ClimateGroups &groups);

} // namespace sqf::ingest
