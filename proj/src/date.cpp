#include "dealscope/date.hpp"

#include <charconv>
#include <cstdio>

namespace dealscope {

namespace {

// Civil-from-days and days-from-civil, the classic O(1) Gregorian
// conversions over 400-year eras.
std::int32_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int32_t>(doe) - 719468;
}

void civil_from_days(std::int32_t z, int& y, int& m, int& d) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int yy = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = yy + (m <= 2);
}

bool parse_int(const char* b, const char* e, int& out) {
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

}  // namespace

Date Date::from_ymd(int year, int month, int day) {
    return Date{days_from_civil(year, month, day)};
}

std::optional<Date> Date::parse_iso(const std::string& text) {
    // Strict YYYY-MM-DD.
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y, m, d;
    if (!parse_int(text.data(), text.data() + 4, y)) return std::nullopt;
    if (!parse_int(text.data() + 5, text.data() + 7, m)) return std::nullopt;
    if (!parse_int(text.data() + 8, text.data() + 10, d)) return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    Date date = from_ymd(y, m, d);
    int y2, m2, d2;
    date.to_ymd(y2, m2, d2);
    if (y2 != y || m2 != m || d2 != d) return std::nullopt;  // e.g. Feb 30
    return date;
}

void Date::to_ymd(int& year, int& month, int& day) const {
    civil_from_days(serial, year, month, day);
}

int Date::year() const {
    int y, m, d;
    to_ymd(y, m, d);
    return y;
}

std::string Date::iso() const {
    int y, m, d;
    to_ymd(y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
    return buf;
}

double years_between(Date from, Date to) {
    return (to - from) / 365.25;
}

}  // namespace dealscope
