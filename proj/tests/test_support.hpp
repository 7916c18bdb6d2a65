#pragma once

// Shared builders for hand-written telemetry bundles in tests.

#include "fleetmeter/ingest.hpp"
#include "fleetmeter/types.hpp"

#include <string>
#include <vector>

namespace fleetmeter::test {

struct BundleBuilder {
    Bundle bundle;

    BundleBuilder& machine(const std::string& id, const std::string& hw,
                           const std::string& campus) {
        bundle.machines.push_back({id, hw, campus});
        return *this;
    }

    BundleBuilder& sample(const std::string& machine, const std::string& campus,
                          const std::string& hour, double p_host, double p_accel) {
        bundle.power.push_back({machine, campus, UtcHour::parse(hour), p_host, p_accel});
        return *this;
    }

    BundleBuilder& alloc(const std::string& machine, const std::string& model,
                         const std::string& job, const std::string& hour, double t_total,
                         double t_idle, double p_idle) {
        bundle.allocations.push_back(
            {machine, model, job, UtcHour::parse(hour), t_total, t_idle, p_idle});
        return *this;
    }

    BundleBuilder& tally(const std::string& model, const std::string& dc, const std::string& day,
                         std::uint64_t q) {
        bundle.tallies.push_back({model, dc, UtcDay::parse(day), q});
        return *this;
    }

    BundleBuilder& factors(int year, double pue, std::vector<std::string> campuses,
                           double wue = 1.15, double ef_mb = 94.0, double embodied = 0.0,
                           const std::string& hw = "tpu") {
        FactorSet fs;
        fs.year = year;
        for (const auto& c : campuses) fs.pue_by_campus[c] = pue;
        fs.wue_l_per_kwh = wue;
        fs.ef_mb_g_per_kwh = ef_mb;
        fs.embodied_g_per_machine_hour[hw] = embodied;
        bundle.factors[year] = std::move(fs);
        return *this;
    }
};

} // namespace fleetmeter::test
