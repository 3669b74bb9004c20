#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sqf/core/error.hpp"

namespace sqf::ingest::detail {

inline std::string read_file(const std::filesystem::path &path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw InputFormatError("cannot open '" + path.string() + "'");
	}
	std::ostringstream os;
	os << in.rdbuf();
	return os.str();
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
	std::vector<std::string_view> out;
	std::size_t start = 0;
	while (true) {
		const auto pos = line.find(sep, start);
		if (pos == std::string_view::npos) {
			out.push_back(line.substr(start));
			break;
		}
		out.push_back(line.substr(start, pos - start));
		start = pos + 1;
	}
	for (auto &field : out) {
		while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
			field.remove_prefix(1);
		}
		while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
			field.remove_suffix(1);
		}
	}
	return out;
}

/// Iterates non-empty lines, yielding (1-based line number, fields). Checks the header.
template <typename Fn>
void for_each_row(const std::string &text, std::string_view expected_header, Fn &&fn) {
	std::size_t line_no = 0;
	std::size_t pos = 0;
	bool header_seen = false;
	const auto expected = split(expected_header);
	while (pos <= text.size()) {
		auto end = text.find('\n', pos);
		if (end == std::string::npos) {
			end = text.size();
		}
		std::string_view line(text.data() + pos, end - pos);
		pos = end + 1;
		++line_no;
		if (!line.empty() && line.back() == '\r') {
			line.remove_suffix(1);
		}
		if (line.empty()) {
			if (end == text.size()) {
				break;
			}
			continue;
		}
		auto fields = split(line);
		if (!header_seen) {
			if (fields != expected) {
				throw InputFormatError("expected header '" + std::string(expected_header) + "'", line_no);
			}
			header_seen = true;
			continue;
		}
		if (fields.size() != expected.size()) {
			throw InputFormatError("expected " + std::to_string(expected.size()) + " fields, got " +
			                           std::to_string(fields.size()),
			                       line_no);
		}
		fn(line_no, fields);
		if (end == text.size()) {
			break;
		}
	}
	if (!header_seen) {
		throw InputFormatError("missing header '" + std::string(expected_header) + "'");
	}
}

inline double parse_double(std::string_view field, std::size_t line, std::string_view name) {
	double value = 0.0;
	const auto *first = field.data();
	const auto *last = field.data() + field.size();
	auto [ptr, ec] = std::from_chars(first, last, value);
	if (field.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
		throw InputFormatError("non-numeric " + std::string(name) + " '" + std::string(field) + "'", line);
	}
	return value;
}

inline long long parse_int(std::string_view field, std::size_t line, std::string_view name) {
	long long value = 0;
	auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
	if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
		throw InputFormatError("non-integer " + std::string(name) + " '" + std::string(field) + "'", line);
	}
	return value;
}

inline bool parse_bool(std::string_view field, std::size_t line, std::string_view name) {
	if (field == "1" || field == "true" || field == "True" || field == "TRUE") {
		return true;
	}
	if (field == "0" || field == "false" || field == "False" || field == "FALSE") {
		return false;
	}
	throw InputFormatError("non-boolean " + std::string(name) + " '" + std::string(field) + "'", line);
}

inline std::string format_double(double v) {
	char buf[32];
	std::snprintf(buf, sizeof(buf), "%.17g", v);
	return buf;
}

} // namespace sqf::ingest::detail
