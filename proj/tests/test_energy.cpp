#include "fleetmeter/energy.hpp"

#include "fleetmeter/error.hpp"
#include "fleetmeter/rng.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace fleetmeter;
using fleetmeter::test::BundleBuilder;

namespace {

PowerSample make_sample(double p_host, double p_accel) {
    return {"m1", "dc-a", UtcHour::parse("2025-05-01T00Z"), p_host, p_accel};
}

AllocationRecord make_alloc(double t_total, double t_idle, double p_idle) {
    return {"m1", "gem", "j1", UtcHour::parse("2025-05-01T00Z"), t_total, t_idle, p_idle};
}

bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

} // namespace

TEST_CASE("machine-hour components match the hand-evaluated equations") {
    auto c = machine_hour_components(make_sample(400, 1600), make_alloc(1.0, 0.25, 300), 1.09);
    CHECK(c.e_total_wh == doctest::Approx(2180.0).epsilon(1e-12));
    CHECK(c.e_overhead_wh == doctest::Approx(180.0).epsilon(1e-12));
    CHECK(c.e_idle_wh == doctest::Approx(75.0).epsilon(1e-12));
    CHECK(c.e_active_host_wh == doctest::Approx(385.0).epsilon(1e-12));
    CHECK(c.e_active_accel_wh == doctest::Approx(1540.0).epsilon(1e-12));
    CHECK(c.machine_hours == 1.0);
}

TEST_CASE("unit PUE produces zero overhead") {
    auto c = machine_hour_components(make_sample(500, 1500), make_alloc(0.75, 0.1, 200), 1.0);
    CHECK(c.e_overhead_wh == 0.0);
}

TEST_CASE("zero idle time removes the idle component") {
    auto c = machine_hour_components(make_sample(500, 1500), make_alloc(0.8, 0.0, 350), 1.05);
    CHECK(c.e_idle_wh == 0.0);
    CHECK(c.e_active_host_wh + c.e_active_accel_wh ==
          doctest::Approx(2000.0 * 0.8).epsilon(1e-12));
}

TEST_CASE("idle energy above measured energy is a hard error") {
    CHECK_THROWS_WITH_AS(
        machine_hour_components(make_sample(100, 100), make_alloc(0.5, 0.5, 500), 1.1),
        doctest::Contains("idle energy exceeds measured energy"), Error);
}

TEST_CASE("powered-off machine-hour computes zero active split without error") {
    auto c = machine_hour_components(make_sample(0, 0), make_alloc(1.0, 0.0, 0.0), 1.1);
    CHECK(c.e_active_host_wh == 0.0);
    CHECK(c.e_active_accel_wh == 0.0);
    CHECK(c.e_total_wh == 0.0);
}

TEST_CASE("mismatched sample and allocation keys are rejected") {
    auto alloc = make_alloc(1.0, 0.0, 0.0);
    alloc.machine_id = "other";
    CHECK_THROWS_AS(machine_hour_components(make_sample(10, 10), alloc, 1.0), Error);
    CHECK_THROWS_AS(
        machine_hour_components(make_sample(10, 10), make_alloc(1.0, 0.0, 0.0), 0.99), Error);
}

namespace {

// A bundle of n machine-hours with varied values; one machine per hour slot.
Bundle varied_bundle(int n, std::uint64_t seed, double pue = 1.09) {
    SplitMix64 rng(seed);
    BundleBuilder builder;
    builder.factors(2024, pue, {"dc-a", "dc-b"});
    for (int i = 0; i < n; ++i) {
        const std::string machine = "m" + std::to_string(i);
        const std::string campus = i % 2 == 0 ? "dc-a" : "dc-b";
        const std::string hour = UtcHour::parse("2025-05-01T00Z").to_string();
        builder.machine(machine, "tpu", campus);
        const double ph = rng.next_unit() * 800.0;
        const double pa = rng.next_unit() * 2500.0;
        builder.bundle.power.push_back({machine, campus, UtcHour::parse(hour), ph, pa});
        const double tt = 0.05 + 0.95 * rng.next_unit();
        const double ti = tt * rng.next_unit();
        const double pi = rng.next_unit() * (ph + pa) * 0.5;
        builder.bundle.allocations.push_back(
            {machine, i % 3 == 0 ? "gem-a" : "gem-b", "j1", UtcHour::parse(hour), tt, ti, pi});
    }
    return std::move(builder.bundle);
}

const DateWindow kDay{UtcDay::parse("2025-05-01"), UtcDay::parse("2025-05-01")};

} // namespace

TEST_CASE("aggregation doubles when the записи double") {
    BundleBuilder builder;
    builder.factors(2024, 1.09, {"dc-a"})
        .machine("m1", "tpu", "dc-a")
        .machine("m2", "tpu", "dc-a")
        .sample("m1", "dc-a", "2025-05-01T00Z", 400, 1600)
        .sample("m2", "dc-a", "2025-05-01T00Z", 400, 1600)
        .alloc("m1", "gem", "j1", "2025-05-01T00Z", 1.0, 0.25, 300)
        .alloc("m2", "gem", "j1", "2025-05-01T00Z", 1.0, 0.25, 300);
    auto c = aggregate_components(builder.bundle, "ALL", kDay);
    CHECK(c.e_total_wh == doctest::Approx(2 * 2180.0).epsilon(1e-12));
    CHECK(c.e_idle_wh == doctest::Approx(150.0).epsilon(1e-12));
    CHECK(c.machine_hours == 2.0);
}

TEST_CASE("empty window aggregates to zero components") {
    auto bundle = varied_bundle(10, 5);
    DateWindow later{UtcDay::parse("2026-01-01"), UtcDay::parse("2026-01-31")};
    auto c = aggregate_components(bundle, "ALL", later);
    CHECK(c.e_total_wh == 0.0);
    CHECK(c.machine_hours == 0.0);
}

TEST_CASE("decomposition identity holds on random fleets") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        auto bundle = varied_bundle(500, seed, 1.0 + 0.3 * (seed % 3));
        auto c = aggregate_components(bundle, "ALL", kDay);
        CHECK(close_rel(c.e_total_wh, c.component_sum_wh(), 1e-9));
    }
}

TEST_CASE("overhead ratio equals (pue-1)/pue under a uniform PUE") {
    const double pue = 1.0915625;
    auto bundle = varied_bundle(300, 77, pue);
    auto c = aggregate_components(bundle, "ALL", kDay);
    CHECK(close_rel(c.e_overhead_wh / c.e_total_wh, (pue - 1.0) / pue, 1e-12));
}

TEST_CASE("aggregation is additive over disjoint record sets") {
    auto a = varied_bundle(200, 21);
    auto b = varied_bundle(150, 22);
    // Rename b's machines so the sets stay disjoint.
    for (auto& m : b.machines) m.machine_id = "x" + m.machine_id;
    for (auto& s : b.power) s.machine_id = "x" + s.machine_id;
    for (auto& r : b.allocations) r.machine_id = "x" + r.machine_id;

    Bundle merged = a;
    merged.machines.insert(merged.machines.end(), b.machines.begin(), b.machines.end());
    merged.power.insert(merged.power.end(), b.power.begin(), b.power.end());
    merged.allocations.insert(merged.allocations.end(), b.allocations.begin(),
                              b.allocations.end());

    auto ca = aggregate_components(a, "ALL", kDay);
    auto cb = aggregate_components(b, "ALL", kDay);
    auto cm = aggregate_components(merged, "ALL", kDay);
    CHECK(close_rel(cm.e_total_wh, ca.e_total_wh + cb.e_total_wh, 1e-9));
    CHECK(close_rel(cm.e_active_accel_wh, ca.e_active_accel_wh + cb.e_active_accel_wh, 1e-9));
    CHECK(close_rel(cm.e_idle_wh, ca.e_idle_wh + cb.e_idle_wh, 1e-9));
}

TEST_CASE("record order never changes the output bits") {
    auto bundle = varied_bundle(400, 31);
    auto reference = aggregate_components(bundle, "ALL", kDay);

    SplitMix64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        Bundle shuffled = bundle;
        for (std::size_t i = shuffled.allocations.size(); i > 1; --i) {
            std::swap(shuffled.allocations[i - 1], shuffled.allocations[rng.next() % i]);
        }
        for (std::size_t i = shuffled.power.size(); i > 1; --i) {
            std::swap(shuffled.power[i - 1], shuffled.power[rng.next() % i]);
        }
        auto c = aggregate_components(shuffled, "ALL", kDay);
        CHECK(c.e_total_wh == reference.e_total_wh);
        CHECK(c.e_overhead_wh == reference.e_overhead_wh);
        CHECK(c.e_idle_wh == reference.e_idle_wh);
        CHECK(c.e_active_host_wh == reference.e_active_host_wh);
        CHECK(c.e_active_accel_wh == reference.e_active_accel_wh);
    }
}

TEST_CASE("adding a powered machine-hour strictly increases total energy") {
    auto bundle = varied_bundle(50, 41);
    auto before = aggregate_components(bundle, "ALL", kDay);
    bundle.machines.push_back({"extra", "tpu", "dc-a"});
    bundle.power.push_back({"extra", "dc-a", UtcHour::parse("2025-05-01T00Z"), 100.0, 900.0});
    bundle.allocations.push_back(
        {"extra", "gem-a", "j9", UtcHour::parse("2025-05-01T00Z"), 0.5, 0.0, 0.0});
    auto after = aggregate_components(bundle, "ALL", kDay);
    CHECK(after.e_total_wh > before.e_total_wh);
}

TEST_CASE("model filter selects only that model's machine-hours") {
    auto bundle = varied_bundle(60, 51);
    auto all = aggregate_components(bundle, "ALL", kDay);
    auto a = aggregate_components(bundle, "gem-a", kDay);
    auto b = aggregate_components(bundle, "gem-b", kDay);
    CHECK(close_rel(all.e_total_wh, a.e_total_wh + b.e_total_wh, 1e-9));
    CHECK(a.model_id == "gem-a");
}

TEST_CASE("allocation without a power sample lists the missing join") {
    BundleBuilder builder;
    builder.factors(2024, 1.1, {"dc-a"})
        .machine("m1", "tpu", "dc-a")
        .alloc("m1", "gem", "j1", "2025-05-01T00Z", 1.0, 0.0, 0.0);
    CHECK_THROWS_WITH_AS(aggregate_components(builder.bundle, "ALL", kDay),
                         doctest::Contains("m1@2025-05-01T00Z"), Error);
}

TEST_CASE("machine missing from machines.csv is reported") {
    BundleBuilder builder;
    builder.factors(2024, 1.1, {"dc-a"})
        .sample("m1", "dc-a", "2025-05-01T00Z", 10, 90)
        .alloc("m1", "gem", "j1", "2025-05-01T00Z", 1.0, 0.0, 0.0);
    CHECK_THROWS_WITH_AS(aggregate_components(builder.bundle, "ALL", kDay),
                         doctest::Contains("machines.csv"), Error);
}

TEST_CASE("missing factor year or campus PUE is reported") {
    BundleBuilder builder;
    builder.factors(2020, 1.1, {"dc-a"})
        .machine("m1", "tpu", "dc-a")
        .sample("m1", "dc-a", "2025-05-01T00Z", 10, 90)
        .alloc("m1", "gem", "j1", "2025-05-01T00Z", 1.0, 0.0, 0.0);
    CHECK_THROWS_WITH_AS(aggregate_components(builder.bundle, "ALL", kDay),
                         doctest::Contains("year 2024"), Error);

    BundleBuilder other;
    other.factors(2024, 1.1, {"dc-b"})
        .machine("m1", "tpu", "dc-a")
        .sample("m1", "dc-a", "2025-05-01T00Z", 10, 90)
        .alloc("m1", "gem", "j1", "2025-05-01T00Z", 1.0, 0.0, 0.0);
    CHECK_THROWS_WITH_AS(aggregate_components(other.bundle, "ALL", kDay),
                         doctest::Contains("PUE for campus dc-a"), Error);
}

TEST_CASE("per-prompt energy divides and round-trips") {
    EnergyComponents c;
    c.e_total_wh = 240000.0;
    c.e_overhead_wh = 20000.0;
    c.e_idle_wh = 20000.0;
    c.e_active_host_wh = 60000.0;
    c.e_active_accel_wh = 140000.0;

    auto pp = per_prompt_energy(c, 1000000);
    CHECK(pp.total_wh == doctest::Approx(0.24).epsilon(1e-12));
    CHECK(pp.active_accel_wh == doctest::Approx(0.14).epsilon(1e-12));
    CHECK(pp.boundary == Boundary::comprehensive);

    auto identity = per_prompt_energy(c, 1);
    CHECK(identity.total_wh == c.e_total_wh);

    CHECK_THROWS_WITH_AS(per_prompt_energy(c, 0), doctest::Contains("zero prompt count"), Error);

    SplitMix64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        EnergyComponents r;
        r.e_total_wh = rng.next_unit() * 1e9;
        r.e_overhead_wh = rng.next_unit() * 1e7;
        r.e_idle_wh = rng.next_unit() * 1e7;
        r.e_active_host_wh = rng.next_unit() * 1e8;
        r.e_active_accel_wh = rng.next_unit() * 1e8;
        const std::uint64_t q = 1 + rng.next() % 1000000000ull;
        auto p = per_prompt_energy(r, q);
        CHECK(close_rel(p.total_wh * static_cast<double>(q), r.e_total_wh, 1e-12));
        CHECK(close_rel(p.active_accel_wh * static_cast<double>(q), r.e_active_accel_wh, 1e-12));
    }
}

TEST_CASE("per-model aggregation tracks machine-hours by hardware class") {
    BundleBuilder builder;
    builder.factors(2024, 1.1, {"dc-a"})
        .machine("m1", "tpu-a", "dc-a")
        .machine("m2", "tpu-b", "dc-a")
        .sample("m1", "dc-a", "2025-05-01T00Z", 100, 900)
        .sample("m2", "dc-a", "2025-05-01T00Z", 100, 900)
        .alloc("m1", "gem", "j1", "2025-05-01T00Z", 1.0, 0.0, 0.0)
        .alloc("m2", "gem", "j1", "2025-05-01T00Z", 0.5, 0.0, 0.0);
    auto by_model = aggregate_by_model(builder.bundle, kDay);
    REQUIRE(by_model.count("gem") == 1);
    CHECK(by_model.at("gem").machine_hours_by_hw.at("tpu-a") == 1.0);
    CHECK(by_model.at("gem").machine_hours_by_hw.at("tpu-b") == 0.5);
    CHECK(by_model.at("gem").components.machine_hours == doctest::Approx(1.5));
}
