#pragma once

#include "fleetmeter/types.hpp"

#include <map>
#include <string>

namespace fleetmeter {

// Factor set of the calendar year preceding `date`'s year. Throws naming the
// required year when absent.
const FactorSet& factors_for_date(UtcDay date, const FactorTable& table);

// Market-based Scope 2 plus amortized embodied (Scope 1+3) emissions.
//   scope2_mb = headline Wh/prompt * ef_mb / 1000
//   scope1_3  = sum_hw(machine_hours * embodied_rate) / q
EmissionsPerPrompt emissions_per_prompt(const PerPromptEnergy& energy, const FactorSet& factors,
                                        const std::map<std::string, double>& machine_hours_by_hw,
                                        std::uint64_t q);

// Consumptive water: (total - overhead) Wh/prompt * WUE L/kWh, numerically mL.
WaterPerPrompt water_per_prompt(const PerPromptEnergy& energy, const FactorSet& factors);

// Fleetwide average of per-site values weighted by AI-serving energy.
double fleet_weighted_factor(const std::map<std::string, double>& per_site_values,
                             const std::map<std::string, double>& weights_wh);

} // namespace fleetmeter
