#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace fleetmeter {

/// UTC calendar day, stored as days since 1970-01-01.
class UtcDay {
public:
    UtcDay() = default;
    explicit UtcDay(std::int64_t days_since_epoch) : days_(days_since_epoch) {}

    // Parses the canonical "YYYY-MM-DD" form. Throws Error on anything else.
    static UtcDay parse(std::string_view text);
    static UtcDay from_civil(int year, unsigned month, unsigned day);

    std::string to_string() const;
    std::int64_t count() const { return days_; }
    int year() const;
    unsigned month() const;
    unsigned day_of_month() const;
    UtcDay plus_days(std::int64_t n) const { return UtcDay{days_ + n}; }

    auto operator<=>(const UtcDay&) const = default;

private:
    std::int64_t days_ = 0;
};

/// UTC timestamp truncated to the hour, stored as hours since 1970-01-01T00Z.
class UtcHour {
public:
    UtcHour() = default;
    explicit UtcHour(std::int64_t hours_since_epoch) : hours_(hours_since_epoch) {}

    // Parses the canonical "YYYY-MM-DDTHHZ" form. Throws Error on anything else.
    static UtcHour parse(std::string_view text);
    static UtcHour from_civil(int year, unsigned month, unsigned day, unsigned hour);

    std::string to_string() const;
    std::int64_t count() const { return hours_; }
    UtcDay day() const;
    unsigned hour_of_day() const;

    auto operator<=>(const UtcHour&) const = default;

private:
    std::int64_t hours_ = 0;
};

/// Closed day range; both endpoints inclusive. Sub-day windows do not exist
/// by construction.
struct DateWindow {
    UtcDay from;
    UtcDay to;

    bool contains(UtcDay d) const { return from <= d && d <= to; }
    bool valid() const { return from <= to; }
    std::int64_t day_count() const { return to.count() - from.count() + 1; }
};

/// Calendar month, used for median and trend windows.
struct YearMonth {
    int year = 0;
    int month = 0; // 1..12

    static YearMonth parse(std::string_view text); // "YYYY-MM"
    static YearMonth of(UtcDay d);

    DateWindow window() const; // first..last day of the month
    YearMonth next() const;
    std::string to_string() const;

    auto operator<=>(const YearMonth&) const = default;
};

// Whole months from `first` to `later` (0 when equal, negative when earlier).
int months_between(YearMonth first, YearMonth later);

} // namespace fleetmeter
