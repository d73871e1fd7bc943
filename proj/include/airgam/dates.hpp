#pragma once

#include <cstdint>
#include <string>

namespace airgam {

/// Calendar date broken into civil components.
struct CivilDate {
    int year;
    unsigned month;  // 1..12
    unsigned day;    // 1..31
};

/// Serial day number (days since 1970-01-01, proleptic Gregorian).
std::int64_t days_from_civil(int year, unsigned month, unsigned day) noexcept;

CivilDate civil_from_days(std::int64_t day_number) noexcept;

/// Parses "YYYY-MM-DD". Throws std::invalid_argument on malformed or
/// impossible dates (e.g. 2010-02-30).
std::int64_t parse_iso_date(const std::string& text);

std::string format_iso_date(std::int64_t day_number);

}  // namespace airgam
