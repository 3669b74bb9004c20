#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sqf {

/// Days since 1970-01-01 (proleptic Gregorian).
using EpochDay = std::int64_t;

/// A calendar day. Day-of-year is derived, never stored independently.
struct TimeStamp {
	EpochDay day = 0;

	int dayOfYear() const;
	int year() const;

	friend auto operator<=>(const TimeStamp &, const TimeStamp &) = default;
};

/// Gregorian day-of-year in [1, 366] for an epoch day. Feb 29 maps to 60.
int day_of_year(EpochDay day);

EpochDay epoch_day(int year, unsigned month, unsigned day);

/// Parses `YYYY-MM-DD`. Throws InputFormatError on malformed text.
EpochDay parse_iso_date(std::string_view text);

std::string format_iso_date(EpochDay day);

int year_of(EpochDay day);

} // namespace sqf
