#include "handsel/dates.hpp"

#include <cstdio>

#include "handsel/error.hpp"

namespace handsel {

std::int64_t days_from_civil(const Date& d) {
    // Howard Hinnant's days_from_civil
    std::int64_t y = d.year;
    const int m = d.month;
    const int day = d.day;
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date civil_from_days(std::int64_t days) {
    days += 719468;
    const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(days - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned day = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(day)};
}

int weekday(const Date& d) {
    // 1970-01-01 was a Thursday (index 3 with Monday = 0)
    const std::int64_t days = days_from_civil(d);
    return static_cast<int>(((days + 3) % 7 + 7) % 7);
}

bool is_valid_date(const Date& d) {
    if (d.month < 1 || d.month > 12 || d.day < 1) return false;
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int max_day = lengths[d.month - 1];
    const bool leap = (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
    if (d.month == 2 && leap) max_day = 29;
    return d.day <= max_day;
}

Date parse_date(const std::string& text) {
    Date d;
    char trailing = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%d%c", &d.year, &d.month, &d.day, &trailing) != 3 ||
        !is_valid_date(d)) {
        throw Error(ErrorCode::malformed_row, "invalid date: '" + text + "' (expected YYYY-MM-DD)");
    }
    return d;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

Date Timestamp::utc_date() const {
    std::int64_t days = seconds / 86400;
    if (seconds % 86400 < 0) --days;
    return civil_from_days(days);
}

int Timestamp::utc_hour() const {
    std::int64_t sod = seconds % 86400;
    if (sod < 0) sod += 86400;
    return static_cast<int>(sod / 3600);
}

Date Timestamp::local_date(int offset_minutes) const {
    return Timestamp{seconds + 60ll * offset_minutes}.utc_date();
}

int Timestamp::local_hour(int offset_minutes) const {
    return Timestamp{seconds + 60ll * offset_minutes}.utc_hour();
}

Timestamp parse_timestamp(const std::string& text) {
    int y = 0, mo = 0, da = 0, h = 0, mi = 0, se = 0;
    char zone = 0, trailing = 0;
    const int n = std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d%c%c",
                              &y, &mo, &da, &h, &mi, &se, &zone, &trailing);
    const Date d{y, mo, da};
    if (n != 7 || zone != 'Z' || !is_valid_date(d) ||
        h < 0 || h > 23 || mi < 0 || mi > 59 || se < 0 || se > 59) {
        throw Error(ErrorCode::malformed_row,
                    "invalid timestamp: '" + text + "' (expected YYYY-MM-DDTHH:MM:SSZ)");
    }
    return Timestamp{days_from_civil(d) * 86400 + h * 3600 + mi * 60 + se};
}

std::string format_timestamp(const Timestamp& t) {
    const Date d = t.utc_date();
    std::int64_t sod = t.seconds % 86400;
    if (sod < 0) sod += 86400;
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", d.year, d.month, d.day,
                  static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60),
                  static_cast<int>(sod % 60));
    return buf;
}

Timestamp midnight_utc(const Date& d) {
    return Timestamp{days_from_civil(d) * 86400};
}

int season_start_year(const Date& d) {
    return d.month >= 7 ? d.year : d.year - 1;
}

std::string season_label(const Date& d) {
    const int start = season_start_year(d);
    return std::to_string(start) + "/" + std::to_string(start + 1);
}

} // namespace handsel
