#include "fleetmeter/footprint.hpp"

#include "fleetmeter/error.hpp"

namespace fleetmeter {

const FactorSet& factors_for_date(UtcDay date, const FactorTable& table) {
    const int needed = date.year() - 1;
    auto it = table.find(needed);
    if (it == table.end()) {
        throw Error("no factor set for year " + std::to_string(needed) + " (required for " +
                    date.to_string() + ")");
    }
    return it->second;
}

EmissionsPerPrompt emissions_per_prompt(const PerPromptEnergy& energy, const FactorSet& factors,
                                        const std::map<std::string, double>& machine_hours_by_hw,
                                        std::uint64_t q) {
    if (q == 0) throw Error("zero prompt count");
    EmissionsPerPrompt em;
    em.scope2_mb_g = energy.headline_total_wh() * factors.ef_mb_g_per_kwh / 1000.0;
    double embodied_g = 0.0;
    for (const auto& [hw, hours] : machine_hours_by_hw) {
        auto it = factors.embodied_g_per_machine_hour.find(hw);
        if (it == factors.embodied_g_per_machine_hour.end()) {
            throw Error("no embodied rate for hardware class " + hw + " in factor year " +
                        std::to_string(factors.year));
        }
        embodied_g += hours * it->second;
    }
    em.scope1_3_g = embodied_g / static_cast<double>(q);
    em.total_g = em.scope2_mb_g + em.scope1_3_g;
    return em;
}

WaterPerPrompt water_per_prompt(const PerPromptEnergy& energy, const FactorSet& factors) {
    // Wh * L/kWh = mL; the unit factors cancel.
    const double it_energy_wh = energy.headline_total_wh() - energy.headline_overhead_wh();
    return WaterPerPrompt{it_energy_wh * factors.wue_l_per_kwh};
}

double fleet_weighted_factor(const std::map<std::string, double>& per_site_values,
                             const std::map<std::string, double>& weights_wh) {
    double weighted = 0.0;
    double total_weight = 0.0;
    for (const auto& [site, value] : per_site_values) {
        auto it = weights_wh.find(site);
        if (it == weights_wh.end()) continue;
        if (it->second < 0.0) throw Error("negative weight for site " + site);
        weighted += value * it->second;
        total_weight += it->second;
    }
    if (total_weight <= 0.0) {
        throw Error("fleet weighting requires at least one positive weight");
    }
    return weighted / total_weight;
}

} // namespace fleetmeter
