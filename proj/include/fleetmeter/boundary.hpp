#pragma once

#include "fleetmeter/energy.hpp"
#include "fleetmeter/types.hpp"

#include <set>
#include <span>

namespace fleetmeter {

// Per-datacenter active-accelerator efficiency for one day, one row per
// datacenter with prompts, sorted ascending by energy/prompt (ties by
// datacenter_id). `model_set` empty selects every model.
std::vector<DcEfficiencyRow> dc_daily_efficiency(const Bundle& bundle,
                                                 const std::set<std::string>& model_set,
                                                 UtcDay day);

// Existing-approach boundary: the first ceil(fraction * row_count) rows of an
// ascending efficiency table. Headline is the prompt-weighted active
// accelerator energy of the subsample; the other components are recorded but
// excluded from the headline.
PerPromptEnergy existing_boundary(std::span<const DcEfficiencyRow> rows, double fraction = 0.10);

// Comprehensive boundary: full-stack per-prompt energy.
PerPromptEnergy comprehensive_boundary(const EnergyComponents& components, std::uint64_t q);

// Ratio of full-stack energy to fleet-average active accelerator energy; the
// multiplier an accelerator-only figure needs to cover the serving stack.
double boundary_scaling_factor(const PerPromptEnergy& comprehensive,
                               double fleet_accel_wh_per_prompt);

} // namespace fleetmeter
