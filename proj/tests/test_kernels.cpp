#include "fleetmeter/kernels.hpp"
#include "fleetmeter/rng.hpp"

#include <doctest.h>

#include <cstdlib>
#include <vector>

using namespace fleetmeter;
using namespace fleetmeter::kernels;

namespace {

struct Batch {
    std::vector<double> p_host, p_accel, t_total, t_idle, p_idle, pue;

    MachineHourView view() const {
        return {p_host.data(), p_accel.data(), t_total.data(),
                t_idle.data(), p_idle.data(), pue.data(), p_host.size()};
    }
};

struct Outputs {
    std::vector<double> total, overhead, idle, active_host, active_accel;

    explicit Outputs(std::size_t n)
        : total(n), overhead(n), idle(n), active_host(n), active_accel(n) {}

    ComponentArrays arrays() {
        return {total.data(), overhead.data(), idle.data(), active_host.data(),
                active_accel.data()};
    }
};

Batch random_batch(std::size_t n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Batch b;
    for (std::size_t i = 0; i < n; ++i) {
        // Every ~13th element gets a fully powered-off machine to exercise
        // the 0/0 split lanes.
        const bool dark = rng.next() % 13 == 0;
        const double ph = dark ? 0.0 : rng.next_unit() * 1200.0;
        const double pa = dark ? 0.0 : rng.next_unit() * 3000.0;
        const double tt = 0.05 + 0.95 * rng.next_unit();
        const double ti = tt * rng.next_unit();
        const double pi = dark ? 0.0 : rng.next_unit() * (ph + pa);
        b.p_host.push_back(ph);
        b.p_accel.push_back(pa);
        b.t_total.push_back(tt);
        b.t_idle.push_back(ti);
        b.p_idle.push_back(pi);
        b.pue.push_back(1.0 + rng.next_unit() * 0.5);
    }
    return b;
}

} // namespace

TEST_CASE("scalar kernel evaluates the component equations") {
    Batch b;
    b.p_host = {400.0};
    b.p_accel = {1600.0};
    b.t_total = {1.0};
    b.t_idle = {0.25};
    b.p_idle = {300.0};
    b.pue = {1.09};
    Outputs out(1);
    components_scalar(b.view(), out.arrays());
    CHECK(out.total[0] == doctest::Approx(2180.0).epsilon(1e-12));
    CHECK(out.overhead[0] == doctest::Approx(180.0).epsilon(1e-12));
    CHECK(out.idle[0] == doctest::Approx(75.0).epsilon(1e-12));
    CHECK(out.active_host[0] == doctest::Approx(385.0).epsilon(1e-12));
    CHECK(out.active_accel[0] == doctest::Approx(1540.0).epsilon(1e-12));
}

TEST_CASE("powered-off machine yields zero active components") {
    Batch b;
    b.p_host = {0.0};
    b.p_accel = {0.0};
    b.t_total = {1.0};
    b.t_idle = {0.0};
    b.p_idle = {0.0};
    b.pue = {1.2};
    Outputs out(1);
    components_scalar(b.view(), out.arrays());
    CHECK(out.active_host[0] == 0.0);
    CHECK(out.active_accel[0] == 0.0);
    CHECK(out.total[0] == 0.0);
}

TEST_CASE("SIMD variants are bit-identical to the scalar reference") {
    auto kernels = available_kernels();
    REQUIRE(!kernels.empty());
    CHECK(kernels.front().name == std::string("scalar"));

    for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{3}, std::size_t{4},
                          std::size_t{7}, std::size_t{64}, std::size_t{1001}}) {
        Batch b = random_batch(n, 7000 + n);
        Outputs reference(n);
        components_scalar(b.view(), reference.arrays());
        for (const auto& k : kernels) {
            Outputs out(n);
            k.fn(b.view(), out.arrays());
            for (std::size_t i = 0; i < n; ++i) {
                // Exact bit equality, not approximate.
                REQUIRE_MESSAGE(out.total[i] == reference.total[i], k.name, " i=", i);
                REQUIRE(out.overhead[i] == reference.overhead[i]);
                REQUIRE(out.idle[i] == reference.idle[i]);
                REQUIRE(out.active_host[i] == reference.active_host[i]);
                REQUIRE(out.active_accel[i] == reference.active_accel[i]);
            }
        }
    }
}

TEST_CASE("block sum is accurate and worker-count invariant") {
    SplitMix64 rng(42);
    std::vector<double> values;
    long double exact = 0.0L;
    for (int i = 0; i < 100000; ++i) {
        const double v = (rng.next_unit() - 0.25) * 1e6;
        values.push_back(v);
        exact += v;
    }
    const double reference = block_sum(values, 1);
    CHECK(reference ==
          doctest::Approx(static_cast<double>(exact)).epsilon(1e-13));
    for (unsigned workers : {2u, 3u, 8u, 64u}) {
        CHECK(block_sum(values, workers) == reference); // bitwise
    }
    CHECK(block_sum({}, 4) == 0.0);
}

TEST_CASE("kernel selection honors the environment override") {
    ::setenv("FLEETMETER_KERNEL", "scalar", 1);
    CHECK(select_kernel().name == std::string("scalar"));
    ::setenv("FLEETMETER_KERNEL", "does-not-exist", 1);
    CHECK_THROWS(select_kernel());
    ::unsetenv("FLEETMETER_KERNEL");
    CHECK(select_kernel().name == available_kernels().back().name);
}

TEST_CASE("thread count resolution") {
    ::setenv("FLEETMETER_THREADS", "3", 1);
    CHECK(resolve_thread_count() == 3);
    ::setenv("FLEETMETER_THREADS", "0", 1);
    CHECK(resolve_thread_count() >= 1);
    ::unsetenv("FLEETMETER_THREADS");
    CHECK(resolve_thread_count() >= 1);
}
