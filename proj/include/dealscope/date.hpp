#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace dealscope {

// Calendar date backed by a serial day count (days since 1970-01-01,
// proleptic Gregorian). Comparisons and differences are integer math.
struct Date {
    std::int32_t serial = 0;

    static Date from_ymd(int year, int month, int day);
    static std::optional<Date> parse_iso(const std::string& text);

    void to_ymd(int& year, int& month, int& day) const;
    int year() const;
    std::string iso() const;

    auto operator<=>(const Date&) const = default;
};

inline std::int32_t operator-(Date a, Date b) { return a.serial - b.serial; }

// Fractional years between two dates, 365.25-day convention.
double years_between(Date from, Date to);

}  // namespace dealscope
