#pragma once

#include "fleetmeter/aggregate.hpp"
#include "fleetmeter/boundary.hpp"
#include "fleetmeter/energy.hpp"
#include "fleetmeter/footprint.hpp"
#include "fleetmeter/ingest.hpp"

#include <set>
#include <string>

namespace fleetmeter {

// Prompts served by `model_id` ("ALL" = every model) within the window.
std::uint64_t total_prompts(const Bundle& bundle, const std::string& model_id,
                            const DateWindow& window);

struct ComputeResult {
    EnergyComponents components; // absolute decomposition (comprehensive boundary data)
    PerPromptEnergy per_prompt;
    std::uint64_t q = 0;
};

// Comprehensive pipeline: aggregate, divide by prompts.
ComputeResult compute_comprehensive(const Bundle& bundle, const std::string& model_id,
                                    const DateWindow& window);

// Existing-approach pipeline over a window: the top-decile subsample is
// selected per day (the paper defines efficiency daily), then the selected
// accelerator energy and prompts pool across days.
PerPromptEnergy compute_existing(const Bundle& bundle, const std::string& model_id,
                                 const DateWindow& window, double fraction = 0.10);

struct CompareResult {
    PerPromptEnergy comprehensive;
    PerPromptEnergy existing;
    double ratio = 0.0;          // comprehensive total over existing headline
    double scaling_factor = 0.0; // comprehensive total over fleet-average accel
};

CompareResult compare_boundaries(const Bundle& bundle, const DateWindow& window,
                                 double fraction = 0.10);

// Energy-weighted fleet PUE over the window, a report diagnostic.
double fleet_average_pue(const Bundle& bundle, const DateWindow& window);

} // namespace fleetmeter
