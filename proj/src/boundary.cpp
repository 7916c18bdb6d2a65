#include "fleetmeter/boundary.hpp"

#include "fleetmeter/error.hpp"

#include <algorithm>
#include <cmath>

namespace fleetmeter {

std::vector<DcEfficiencyRow> dc_daily_efficiency(const Bundle& bundle,
                                                 const std::set<std::string>& model_set,
                                                 UtcDay day) {
    HourFilter filter;
    filter.window = DateWindow{day, day};
    if (!model_set.empty()) filter.models = &model_set;
    auto rows = join_hours(bundle, filter);

    std::map<std::string, std::vector<JoinedHour>> by_campus;
    for (const auto& row : rows) by_campus[row.machine->campus_id].push_back(row);

    std::map<std::string, std::uint64_t> prompts;
    for (const auto& t : bundle.tallies) {
        if (t.day != day) continue;
        if (!model_set.empty() && !model_set.count(t.model_id)) continue;
        prompts[t.datacenter_id] += t.q;
    }

    std::vector<DcEfficiencyRow> result;
    for (const auto& [dc, q] : prompts) {
        if (q == 0) continue;
        DcEfficiencyRow row;
        row.datacenter_id = dc;
        row.day = day;
        row.q = q;
        auto it = by_campus.find(dc);
        if (it != by_campus.end()) {
            row.components = reduce_hours(it->second, DateWindow{day, day}, kAllModels);
        }
        row.accel_energy_wh = row.components.e_active_accel_wh;
        if (row.accel_energy_wh <= 0.0) {
            throw Error("datacenter " + dc + " served " + std::to_string(q) + " prompts on " +
                        day.to_string() + " but has no accelerator energy telemetry");
        }
        row.energy_per_prompt = row.accel_energy_wh / static_cast<double>(q);
        result.push_back(std::move(row));
    }

    std::sort(result.begin(), result.end(), [](const DcEfficiencyRow& a, const DcEfficiencyRow& b) {
        if (a.energy_per_prompt != b.energy_per_prompt) {
            return a.energy_per_prompt < b.energy_per_prompt;
        }
        return a.datacenter_id < b.datacenter_id;
    });
    return result;
}

PerPromptEnergy existing_boundary(std::span<const DcEfficiencyRow> rows, double fraction) {
    if (rows.empty()) throw Error("existing boundary requires at least one datacenter row");
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw Error("fraction must be in (0, 1]");
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i - 1].energy_per_prompt > rows[i].energy_per_prompt) {
            throw Error("efficiency rows must be sorted ascending by energy/prompt");
        }
    }

    const std::size_t count = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(rows.size())));
    const std::size_t selected = std::max<std::size_t>(1, std::min(count, rows.size()));

    double accel = 0.0, total = 0.0, overhead = 0.0, idle = 0.0, host = 0.0;
    std::uint64_t q = 0;
    for (std::size_t i = 0; i < selected; ++i) {
        accel += rows[i].accel_energy_wh;
        total += rows[i].components.e_total_wh;
        overhead += rows[i].components.e_overhead_wh;
        idle += rows[i].components.e_idle_wh;
        host += rows[i].components.e_active_host_wh;
        q += rows[i].q;
    }
    if (q == 0) throw Error("zero prompt count");

    const double qd = static_cast<double>(q);
    PerPromptEnergy pp;
    pp.total_wh = total / qd;
    pp.overhead_wh = overhead / qd;
    pp.idle_wh = idle / qd;
    pp.active_host_wh = host / qd;
    pp.active_accel_wh = accel / qd;
    pp.q = q;
    pp.boundary = Boundary::existing;
    return pp;
}

PerPromptEnergy comprehensive_boundary(const EnergyComponents& components, std::uint64_t q) {
    return per_prompt_energy(components, q);
}

double boundary_scaling_factor(const PerPromptEnergy& comprehensive,
                               double fleet_accel_wh_per_prompt) {
    if (!(fleet_accel_wh_per_prompt > 0.0)) {
        throw Error("accelerator energy per prompt must be positive");
    }
    return comprehensive.total_wh / fleet_accel_wh_per_prompt;
}

const char* to_string(Boundary b) {
    return b == Boundary::existing ? "existing" : "comprehensive";
}

} // namespace fleetmeter
