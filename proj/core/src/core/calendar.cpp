#include "sqf/core/calendar.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "sqf/core/error.hpp"

namespace sqf {

namespace {

std::chrono::year_month_day civil(EpochDay day) {
	return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{day}}};
}

template <typename T>
bool parse_field(std::string_view text, T &out) {
	const auto *first = text.data();
	const auto *last = text.data() + text.size();
	auto [ptr, ec] = std::from_chars(first, last, out);
	return ec == std::errc{} && ptr == last;
}

} // namespace

int TimeStamp::dayOfYear() const { return day_of_year(day); }

int TimeStamp::year() const { return year_of(day); }

int day_of_year(EpochDay day) {
	using namespace std::chrono;
	const auto ymd = civil(day);
	const sys_days jan1{ymd.year() / January / 1};
	return static_cast<int>((sys_days{days{day}} - jan1).count()) + 1;
}

int year_of(EpochDay day) { return static_cast<int>(civil(day).year()); }

EpochDay epoch_day(int year, unsigned month, unsigned day) {
	using namespace std::chrono;
	const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
	if (!ymd.ok()) {
		throw InputFormatError("invalid calendar date");
	}
	return sys_days{ymd}.time_since_epoch().count();
}

EpochDay parse_iso_date(std::string_view text) {
	if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
		throw InputFormatError("expected ISO date YYYY-MM-DD, got '" + std::string(text) + "'");
	}
	int y = 0;
	unsigned m = 0;
	unsigned d = 0;
	if (!parse_field(text.substr(0, 4), y) || !parse_field(text.substr(5, 2), m) || !parse_field(text.substr(8, 2), d)) {
		throw InputFormatError("expected ISO date YYYY-MM-DD, got '" + std::string(text) + "'");
	}
	const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
	if (!ymd.ok()) {
		throw InputFormatError("invalid calendar date '" + std::string(text) + "'");
	}
	return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

std::string format_iso_date(EpochDay day) {
	const auto ymd = civil(day);
	char buf[16];
	std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
	              static_cast<unsigned>(ymd.day()));
	return buf;
}

} // namespace sqf
