#include "fleetmeter/csv.hpp"
#include "fleetmeter/error.hpp"
#include "fleetmeter/ingest.hpp"
#include "fleetmeter/rng.hpp"

#include <doctest.h>

#include <string>

using namespace fleetmeter;

namespace {

const char* kPowerText =
    "machine_id,campus_id,hour,p_host_w,p_accel_w\n"
    "m1,dc-a,2025-05-01T00Z,400,1600\n"
    "m2,dc-a,2025-05-01T00Z,410.5,1590.25\n";

} // namespace

TEST_CASE("power samples parse in file order") {
    auto records = parse_power_samples(kPowerText);
    REQUIRE(records.size() == 2);
    CHECK(records[0].machine_id == "m1");
    CHECK(records[0].campus_id == "dc-a");
    CHECK(records[0].p_host_w == 400.0);
    CHECK(records[0].p_accel_w == 1600.0);
    CHECK(records[0].p_total_w() == 2000.0);
    CHECK(records[1].machine_id == "m2");
    CHECK(records[1].hour.to_string() == "2025-05-01T00Z");
}

TEST_CASE("negative power names the line and field") {
    const std::string text =
        "machine_id,campus_id,hour,p_host_w,p_accel_w\n"
        "m1,dc-a,2025-05-01T00Z,-5,1600\n";
    try {
        parse_power_samples(text);
        FAIL("expected an error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("negative power") != std::string::npos);
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("p_host") != std::string::npos);
    }
}

TEST_CASE("duplicate (machine, hour) is a hard error") {
    const std::string text =
        "machine_id,campus_id,hour,p_host_w,p_accel_w\n"
        "m1,dc-a,2025-05-01T00Z,400,1600\n"
        "m1,dc-a,2025-05-01T00Z,400,1600\n";
    CHECK_THROWS_WITH_AS(parse_power_samples(text),
                         doctest::Contains("duplicate (machine_id, hour)"), Error);
}

TEST_CASE("power sample malformed lines collect per-line diagnostics") {
    const std::string text =
        "machine_id,campus_id,hour,p_host_w,p_accel_w\n"
        "m1,dc-a,2025-05-01T00Z,400\n"
        "m2,dc-a,not-an-hour,400,1600\n"
        "m3,dc-a,2025-05-01T00Z,x,1600\n"
        "m4,dc-a,2025-05-01T00Z,400,1600\n";
    auto scan = scan_power_samples(text);
    CHECK(scan.diagnostics.size() == 3);
    REQUIRE(scan.records.size() == 1);
    CHECK(scan.records[0].machine_id == "m4");
    CHECK(scan.diagnostics[0].line == 2);
    CHECK(scan.diagnostics[1].line == 3);
    CHECK(scan.diagnostics[2].line == 4);
}

TEST_CASE("allocations parse and validate time fractions") {
    const std::string text =
        "machine_id,model_id,job_id,hour,t_total_h,t_idle_h,p_idle_w\n"
        "m1,gem-s,j7,2025-05-01T00Z,1.0,0.25,300\n";
    auto records = parse_allocations(text);
    REQUIRE(records.size() == 1);
    CHECK(records[0].t_total_h == 1.0);
    CHECK(records[0].t_idle_h == 0.25);
    CHECK(records[0].p_idle_w == 300.0);
    CHECK(records[0].model_id == "gem-s");
    CHECK(records[0].job_id == "j7");
}

TEST_CASE("t_idle above t_total is rejected with the line number") {
    const std::string text =
        "machine_id,model_id,job_id,hour,t_total_h,t_idle_h,p_idle_w\n"
        "m1,gem-s,j7,2025-05-01T00Z,0.5,0.6,300\n";
    try {
        parse_allocations(text);
        FAIL("expected an error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("t_idle exceeds t_total") != std::string::npos);
        CHECK(msg.find("line 2") != std::string::npos);
    }
}

TEST_CASE("t_total above one hour is rejected") {
    const std::string text =
        "machine_id,model_id,job_id,hour,t_total_h,t_idle_h,p_idle_w\n"
        "m1,gem-s,j7,2025-05-01T00Z,1.5,0.2,300\n";
    CHECK_THROWS_AS(parse_allocations(text), Error);
}

TEST_CASE("header-only file yields an empty sequence") {
    CHECK(parse_allocations("machine_id,model_id,job_id,hour,t_total_h,t_idle_h,p_idle_w\n")
              .empty());
    CHECK(parse_power_samples("machine_id,campus_id,hour,p_host_w,p_accel_w").empty());
}

TEST_CASE("wrong header is rejected") {
    CHECK_THROWS_WITH_AS(parse_power_samples("a,b,c\n"), doctest::Contains("bad header"), Error);
}

TEST_CASE("prompt tallies parse; negatives and duplicates rejected") {
    auto records = parse_prompt_tallies(
        "model_id,datacenter_id,day,q\n"
        "gem-s,dc-a,2025-05-01,100000\n");
    REQUIRE(records.size() == 1);
    CHECK(records[0].q == 100000);

    CHECK_THROWS_AS(parse_prompt_tallies("model_id,datacenter_id,day,q\n"
                                         "gem-s,dc-a,2025-05-01,-3\n"),
                    Error);
    CHECK_THROWS_AS(parse_prompt_tallies("model_id,datacenter_id,day,q\n"
                                         "gem-s,dc-a,2025-05-01,10.5\n"),
                    Error);
    CHECK_THROWS_WITH_AS(parse_prompt_tallies("model_id,datacenter_id,day,q\n"
                                              "gem-s,dc-a,2025-05-01,5\n"
                                              "gem-s,dc-a,2025-05-01,6\n"),
                         doctest::Contains("duplicate"), Error);
}

TEST_CASE("factor table parses reference values") {
    const char* text = R"({
      "2024": {"pue_by_campus": {"dc-a": 1.09}, "wue_l_per_kwh": 1.15,
               "ef_mb_g_per_kwh": 94, "ef_lb_g_per_kwh": 345,
               "embodied_g_per_machine_hour": {"tpu": 90.0}},
      "2023": {"pue_by_campus": {"dc-a": 1.10}, "wue_l_per_kwh": 1.15,
               "ef_mb_g_per_kwh": 135,
               "embodied_g_per_machine_hour": {"tpu": 90.0}}
    })";
    auto factors = load_factors(text);
    REQUIRE(factors.size() == 2);
    CHECK(factors.at(2024).ef_mb_g_per_kwh == 94.0);
    CHECK(factors.at(2024).wue_l_per_kwh == 1.15);
    CHECK(factors.at(2024).ef_lb_g_per_kwh == 345.0);
    CHECK(factors.at(2023).ef_mb_g_per_kwh == 135.0);
    CHECK_FALSE(factors.at(2023).ef_lb_g_per_kwh.has_value());
}

TEST_CASE("factor table rejects physical and schema violations") {
    CHECK_THROWS_WITH_AS(
        load_factors(R"({"2024": {"pue_by_campus": {"dc-a": 0.9}, "wue_l_per_kwh": 1.0,
                         "ef_mb_g_per_kwh": 90, "embodied_g_per_machine_hour": {}}})"),
        doctest::Contains("PUE below 1.0"), Error);
    CHECK_THROWS_WITH_AS(
        load_factors(R"({"2024": {"pue_by_campus": {},
                         "ef_mb_g_per_kwh": 90, "embodied_g_per_machine_hour": {}}})"),
        doctest::Contains("missing required field"), Error);
    CHECK_THROWS_WITH_AS(load_factors(R"({"24": {}})"), doctest::Contains("unknown year format"),
                         Error);
    CHECK_THROWS_AS(load_factors("not json"), Error);
}

namespace {

PowerSample random_sample(SplitMix64& rng) {
    PowerSample s;
    s.machine_id = "m" + std::to_string(rng.next() % 1000);
    s.campus_id = "dc-" + std::to_string(rng.next() % 20);
    s.hour = UtcHour{static_cast<std::int64_t>(430000 + rng.next() % 100000)};
    s.p_host_w = rng.next_unit() * 1000.0;
    s.p_accel_w = rng.next_unit() * 3000.0;
    return s;
}

AllocationRecord random_alloc(SplitMix64& rng) {
    AllocationRecord a;
    a.machine_id = "m" + std::to_string(rng.next() % 1000);
    a.model_id = "model-" + std::to_string(rng.next() % 9);
    a.job_id = "j" + std::to_string(rng.next() % 50);
    a.hour = UtcHour{static_cast<std::int64_t>(430000 + rng.next() % 100000)};
    a.t_total_h = 0.05 + 0.95 * rng.next_unit();
    a.t_idle_h = a.t_total_h * rng.next_unit();
    a.p_idle_w = rng.next_unit() * 500.0;
    return a;
}

} // namespace

TEST_CASE("canonical serialization round-trips bit-for-bit") {
    SplitMix64 rng(99);
    std::vector<PowerSample> samples;
    std::vector<AllocationRecord> allocs;
    std::vector<PromptTally> tallies;
    for (int i = 0; i < 200; ++i) {
        PowerSample s = random_sample(rng);
        s.machine_id += "-" + std::to_string(i); // keep keys unique
        samples.push_back(s);
        allocs.push_back(random_alloc(rng));
        tallies.push_back({"model-" + std::to_string(i), "dc-1",
                           UtcDay{static_cast<std::int64_t>(20000 + i)}, rng.next() % 1000000});
    }

    auto samples2 = parse_power_samples(to_csv(samples));
    REQUIRE(samples2.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(samples2[i].machine_id == samples[i].machine_id);
        CHECK(samples2[i].campus_id == samples[i].campus_id);
        CHECK(samples2[i].hour == samples[i].hour);
        CHECK(samples2[i].p_host_w == samples[i].p_host_w);
        CHECK(samples2[i].p_accel_w == samples[i].p_accel_w);
    }

    auto allocs2 = parse_allocations(to_csv(allocs));
    REQUIRE(allocs2.size() == allocs.size());
    for (std::size_t i = 0; i < allocs.size(); ++i) {
        CHECK(allocs2[i].machine_id == allocs[i].machine_id);
        CHECK(allocs2[i].model_id == allocs[i].model_id);
        CHECK(allocs2[i].job_id == allocs[i].job_id);
        CHECK(allocs2[i].hour == allocs[i].hour);
        CHECK(allocs2[i].t_total_h == allocs[i].t_total_h);
        CHECK(allocs2[i].t_idle_h == allocs[i].t_idle_h);
        CHECK(allocs2[i].p_idle_w == allocs[i].p_idle_w);
    }

    auto tallies2 = parse_prompt_tallies(to_csv(tallies));
    REQUIRE(tallies2.size() == tallies.size());
    for (std::size_t i = 0; i < tallies.size(); ++i) {
        CHECK(tallies2[i].model_id == tallies[i].model_id);
        CHECK(tallies2[i].day == tallies[i].day);
        CHECK(tallies2[i].q == tallies[i].q);
    }
}

TEST_CASE("factor table serialization round-trips") {
    auto factors = load_factors(R"({
      "2024": {"pue_by_campus": {"dc-a": 1.0915625, "dc-b": 1.21}, "wue_l_per_kwh": 1.15,
               "ef_mb_g_per_kwh": 94, "ef_lb_g_per_kwh": 345.5,
               "embodied_g_per_machine_hour": {"tpu": 90.90909090909091}}})");
    auto reparsed = load_factors(to_json(factors));
    CHECK(reparsed.at(2024).pue_by_campus == factors.at(2024).pue_by_campus);
    CHECK(reparsed.at(2024).embodied_g_per_machine_hour ==
          factors.at(2024).embodied_g_per_machine_hour);
    CHECK(reparsed.at(2024).ef_lb_g_per_kwh == factors.at(2024).ef_lb_g_per_kwh);
}

TEST_CASE("acceptance matches validity for generated allocation lines") {
    SplitMix64 rng(1234);
    const std::string header = "machine_id,model_id,job_id,hour,t_total_h,t_idle_h,p_idle_w\n";
    for (int trial = 0; trial < 500; ++trial) {
        double t_total = -0.5 + 2.0 * rng.next_unit();
        double t_idle = -0.2 + 1.6 * rng.next_unit();
        double p_idle = -100.0 + 600.0 * rng.next_unit();
        const bool valid = t_total > 0.0 && t_total <= 1.0 && t_idle >= 0.0 &&
                           t_idle <= t_total && p_idle >= 0.0;
        const std::string line = "m1,gem,j1,2025-05-01T03Z," + csv::format_double(t_total) + "," +
                                 csv::format_double(t_idle) + "," + csv::format_double(p_idle) +
                                 "\n";
        auto scan = scan_allocations(header + line);
        CHECK_MESSAGE(scan.ok() == valid, "line: ", line);
        CHECK(scan.records.size() == (valid ? 1u : 0u));
    }
}

TEST_CASE("cross-validation reports missing joins and mismatched campuses") {
    Bundle b;
    b.machines = parse_machines(
        "machine_id,hardware_class,campus_id\n"
        "m1,tpu,dc-a\n");
    b.power = parse_power_samples(
        "machine_id,campus_id,hour,p_host_w,p_accel_w\n"
        "m1,dc-b,2025-05-01T00Z,100,900\n");
    b.allocations = parse_allocations(
        "machine_id,model_id,job_id,hour,t_total_h,t_idle_h,p_idle_w\n"
        "m1,gem,j1,2025-05-01T00Z,1.0,0,0\n"
        "m1,gem,j1,2025-05-01T01Z,1.0,0,0\n"  // no power sample for this hour
        "m9,gem,j1,2025-05-01T00Z,1.0,0,0\n"); // unknown machine
    b.tallies = parse_prompt_tallies(
        "model_id,datacenter_id,day,q\n"
        "gem,dc-a,2025-05-01,10\n"
        "other,dc-a,2025-05-01,10\n"); // no allocations for model "other"
    b.factors = load_factors(R"({"2024": {"pue_by_campus": {"dc-a": 1.1},
        "wue_l_per_kwh": 1.0, "ef_mb_g_per_kwh": 90,
        "embodied_g_per_machine_hour": {"tpu": 10}}})");

    auto diags = cross_validate(b);
    auto contains = [&](const char* needle) {
        for (const auto& d : diags) {
            if (d.message.find(needle) != std::string::npos) return true;
        }
        return false;
    };
    CHECK(contains("campus mismatch"));
    CHECK(contains("has no power sample"));
    CHECK(contains("missing from machines.csv"));
    CHECK(contains("has no matching allocations"));
}
