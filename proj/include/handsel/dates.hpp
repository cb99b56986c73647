#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace handsel {

// Proleptic Gregorian calendar date. Conversions use the classic civil
// calendar algorithms, so no timezone database is involved anywhere.
struct Date {
    int year = 1970;
    int month = 1; // 1..12
    int day = 1;   // 1..31

    auto operator<=>(const Date&) const = default;
};

// Days since 1970-01-01 (can be negative).
std::int64_t days_from_civil(const Date& d);
Date civil_from_days(std::int64_t days);

// Monday = 0 .. Sunday = 6
int weekday(const Date& d);

Date parse_date(const std::string& text);       // "YYYY-MM-DD"
std::string format_date(const Date& d);

bool is_valid_date(const Date& d);

// UTC instant, seconds since the epoch.
struct Timestamp {
    std::int64_t seconds = 0;

    auto operator<=>(const Timestamp&) const = default;

    Date utc_date() const;
    int utc_hour() const;
    // Civil date/hour after applying a fixed minute offset.
    Date local_date(int offset_minutes) const;
    int local_hour(int offset_minutes) const;
};

Timestamp parse_timestamp(const std::string& text); // "YYYY-MM-DDTHH:MM:SSZ"
std::string format_timestamp(const Timestamp& t);

Timestamp midnight_utc(const Date& d);

// Seasons run July 1 .. June 30; the label year is the season's first year,
// so 2021-10-01 and 2022-03-01 both fall in season 2021 ("2021/2022").
int season_start_year(const Date& d);
std::string season_label(const Date& d);

} // namespace handsel
