#include "fleetmeter/error.hpp"
#include "fleetmeter/time.hpp"

#include <doctest.h>

using namespace fleetmeter;

TEST_CASE("day parse and format round-trip") {
    UtcDay d = UtcDay::parse("2025-05-01");
    CHECK(d.to_string() == "2025-05-01");
    CHECK(d.year() == 2025);
    CHECK(d.month() == 5);
    CHECK(d.day_of_month() == 1);
    CHECK(UtcDay::parse("1970-01-01").count() == 0);
}

TEST_CASE("day rejects malformed input") {
    CHECK_THROWS_AS(UtcDay::parse("2025-5-01"), Error);
    CHECK_THROWS_AS(UtcDay::parse("2025-13-01"), Error);
    CHECK_THROWS_AS(UtcDay::parse("2025-02-30"), Error);
    CHECK_THROWS_AS(UtcDay::parse("20250501"), Error);
    CHECK_THROWS_AS(UtcDay::parse(""), Error);
}

TEST_CASE("hour parse, day extraction, formatting") {
    UtcHour h = UtcHour::parse("2025-05-01T00Z");
    CHECK(h.to_string() == "2025-05-01T00Z");
    CHECK(h.day() == UtcDay::parse("2025-05-01"));
    CHECK(h.hour_of_day() == 0);

    UtcHour h23 = UtcHour::parse("2025-05-01T23Z");
    CHECK(h23.count() == h.count() + 23);
    CHECK(h23.day() == h.day());

    CHECK_THROWS_AS(UtcHour::parse("2025-05-01T24Z"), Error);
    CHECK_THROWS_AS(UtcHour::parse("2025-05-01 00Z"), Error);
    CHECK_THROWS_AS(UtcHour::parse("2025-05-01T00"), Error);
}

TEST_CASE("month windows cover leap years") {
    YearMonth feb{2024, 2};
    DateWindow w = feb.window();
    CHECK(w.from.to_string() == "2024-02-01");
    CHECK(w.to.to_string() == "2024-02-29");
    CHECK(w.day_count() == 29);

    YearMonth dec{2024, 12};
    CHECK(dec.next() == YearMonth{2025, 1});
    CHECK(months_between(YearMonth{2024, 5}, YearMonth{2025, 4}) == 11);
}
