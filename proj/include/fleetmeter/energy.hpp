#pragma once

#include "fleetmeter/ingest.hpp"
#include "fleetmeter/types.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>

namespace fleetmeter {

// Energy components of a single machine-hour. `sample` and `alloc` must share
// (machine_id, hour); pue >= 1.0.
EnergyComponents machine_hour_components(const PowerSample& sample,
                                         const AllocationRecord& alloc, double pue);

// One allocation joined to its power sample, machine spec, and campus PUE.
struct JoinedHour {
    const AllocationRecord* alloc = nullptr;
    const PowerSample* sample = nullptr;
    const MachineSpec* machine = nullptr;
    double pue = 1.0;
};

struct HourFilter {
    std::optional<DateWindow> window;              // absent = all days
    const std::set<std::string>* models = nullptr; // nullptr = all models
};

// Joins every allocation passing the filter to its sample, machine, and
// factor-year campus PUE, sorted by (machine_id, hour, model_id, job_id,
// input order). Throws a single Error listing every missing join.
std::vector<JoinedHour> join_hours(const Bundle& bundle, const HourFilter& filter);

// Reduces joined hours to an energy decomposition. Validates that no row's
// idle energy exceeds its measured energy. For a given row order the result
// is byte-identical under any thread count.
EnergyComponents reduce_hours(std::span<const JoinedHour> rows, const DateWindow& window,
                              const std::string& model_label);

// Sum of machine_hour_components over every allocation of `model_id`
// ("ALL" = every model) with a day inside `window`.
EnergyComponents aggregate_components(const Bundle& bundle, const std::string& model_id,
                                      const DateWindow& window);

// Divides each component by q. Boundary tag is comprehensive.
PerPromptEnergy per_prompt_energy(const EnergyComponents& components, std::uint64_t q);

/// Per-model aggregates over a window, for ranking and embodied amortization.
struct ModelAggregate {
    EnergyComponents components;
    std::map<std::string, double> machine_hours_by_hw;
};

std::map<std::string, ModelAggregate> aggregate_by_model(const Bundle& bundle,
                                                         const DateWindow& window);

// Pre-PUE IT energy (p_total * t_total) per campus over a window; the weights
// for fleet-average factor normalization.
std::map<std::string, double> campus_it_energy_wh(const Bundle& bundle,
                                                  const DateWindow& window);

inline constexpr const char* kAllModels = "ALL";

} // namespace fleetmeter
