#include "fleetmeter/time.hpp"

#include "fleetmeter/error.hpp"

#include <chrono>
#include <cstdio>

namespace fleetmeter {

namespace {

namespace chr = std::chrono;

chr::year_month_day civil_of(std::int64_t days_since_epoch) {
    return chr::year_month_day{chr::sys_days{chr::days{days_since_epoch}}};
}

bool all_digits(std::string_view s) {
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return !s.empty();
}

int to_int(std::string_view s) {
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

} // namespace

UtcDay UtcDay::parse(std::string_view text) {
    // YYYY-MM-DD
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
        !all_digits(text.substr(0, 4)) || !all_digits(text.substr(5, 2)) ||
        !all_digits(text.substr(8, 2))) {
        throw Error("invalid day '" + std::string(text) + "', expected YYYY-MM-DD");
    }
    return from_civil(to_int(text.substr(0, 4)),
                      static_cast<unsigned>(to_int(text.substr(5, 2))),
                      static_cast<unsigned>(to_int(text.substr(8, 2))));
}

UtcDay UtcDay::from_civil(int year, unsigned month, unsigned day) {
    chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
    if (!ymd.ok()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
        throw Error(std::string("invalid calendar day '") + buf + "'");
    }
    return UtcDay{chr::sys_days{ymd}.time_since_epoch().count()};
}

std::string UtcDay::to_string() const {
    auto ymd = civil_of(days_);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()));
    return buf;
}

int UtcDay::year() const { return int(civil_of(days_).year()); }
unsigned UtcDay::month() const { return unsigned(civil_of(days_).month()); }
unsigned UtcDay::day_of_month() const { return unsigned(civil_of(days_).day()); }

UtcHour UtcHour::parse(std::string_view text) {
    // YYYY-MM-DDTHHZ
    if (text.size() != 14 || text[10] != 'T' || text.back() != 'Z' ||
        !all_digits(text.substr(11, 2))) {
        throw Error("invalid hour '" + std::string(text) + "', expected YYYY-MM-DDTHHZ");
    }
    UtcDay day = UtcDay::parse(text.substr(0, 10));
    int hh = to_int(text.substr(11, 2));
    if (hh > 23) {
        throw Error("invalid hour '" + std::string(text) + "', hour of day out of range");
    }
    return UtcHour{day.count() * 24 + hh};
}

UtcHour UtcHour::from_civil(int year, unsigned month, unsigned day, unsigned hour) {
    if (hour > 23) throw Error("hour of day out of range");
    return UtcHour{UtcDay::from_civil(year, month, day).count() * 24 + hour};
}

std::string UtcHour::to_string() const {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%sT%02uZ", day().to_string().c_str(), hour_of_day());
    return buf;
}

UtcDay UtcHour::day() const {
    std::int64_t d = hours_ / 24;
    if (hours_ < 0 && hours_ % 24 != 0) --d; // floor division
    return UtcDay{d};
}

unsigned UtcHour::hour_of_day() const {
    return static_cast<unsigned>(hours_ - day().count() * 24);
}

YearMonth YearMonth::parse(std::string_view text) {
    if (text.size() != 7 || text[4] != '-' || !all_digits(text.substr(0, 4)) ||
        !all_digits(text.substr(5, 2))) {
        throw Error("invalid month '" + std::string(text) + "', expected YYYY-MM");
    }
    YearMonth ym{to_int(text.substr(0, 4)), to_int(text.substr(5, 2))};
    if (ym.month < 1 || ym.month > 12) {
        throw Error("invalid month '" + std::string(text) + "', month out of range");
    }
    return ym;
}

YearMonth YearMonth::of(UtcDay d) { return YearMonth{d.year(), static_cast<int>(d.month())}; }

DateWindow YearMonth::window() const {
    UtcDay first = UtcDay::from_civil(year, static_cast<unsigned>(month), 1);
    YearMonth nm = next();
    UtcDay last = UtcDay::from_civil(nm.year, static_cast<unsigned>(nm.month), 1).plus_days(-1);
    return DateWindow{first, last};
}

YearMonth YearMonth::next() const {
    return month == 12 ? YearMonth{year + 1, 1} : YearMonth{year, month + 1};
}

std::string YearMonth::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
}

int months_between(YearMonth first, YearMonth later) {
    return (later.year - first.year) * 12 + (later.month - first.month);
}

} // namespace fleetmeter
