#include "fleetmeter/pipeline.hpp"

#include "fleetmeter/error.hpp"

namespace fleetmeter {

std::uint64_t total_prompts(const Bundle& bundle, const std::string& model_id,
                            const DateWindow& window) {
    std::uint64_t q = 0;
    for (const auto& t : bundle.tallies) {
        if (!window.contains(t.day)) continue;
        if (model_id != kAllModels && t.model_id != model_id) continue;
        q += t.q;
    }
    return q;
}

ComputeResult compute_comprehensive(const Bundle& bundle, const std::string& model_id,
                                    const DateWindow& window) {
    ComputeResult result;
    result.components = aggregate_components(bundle, model_id, window);
    if (result.components.machine_hours == 0.0) {
        throw Error("empty window: no telemetry between " + window.from.to_string() + " and " +
                    window.to.to_string());
    }
    result.q = total_prompts(bundle, model_id, window);
    result.per_prompt = per_prompt_energy(result.components, result.q);
    return result;
}

PerPromptEnergy compute_existing(const Bundle& bundle, const std::string& model_id,
                                 const DateWindow& window, double fraction) {
    if (!window.valid()) throw Error("empty window: from is after to");
    std::set<std::string> model_set;
    if (model_id != kAllModels) model_set.insert(model_id);

    double accel = 0.0, total = 0.0, overhead = 0.0, idle = 0.0, host = 0.0;
    std::uint64_t q = 0;
    bool any_day = false;
    for (UtcDay day = window.from; day <= window.to; day = day.plus_days(1)) {
        auto rows = dc_daily_efficiency(bundle, model_set, day);
        if (rows.empty()) continue;
        any_day = true;
        PerPromptEnergy selected = existing_boundary(rows, fraction);
        const double qd = static_cast<double>(selected.q);
        accel += selected.active_accel_wh * qd;
        total += selected.total_wh * qd;
        overhead += selected.overhead_wh * qd;
        idle += selected.idle_wh * qd;
        host += selected.active_host_wh * qd;
        q += selected.q;
    }
    if (!any_day || q == 0) {
        throw Error("empty window: no prompts between " + window.from.to_string() + " and " +
                    window.to.to_string());
    }

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

CompareResult compare_boundaries(const Bundle& bundle, const DateWindow& window,
                                 double fraction) {
    CompareResult result;
    auto comprehensive = compute_comprehensive(bundle, kAllModels, window);
    result.comprehensive = comprehensive.per_prompt;
    result.existing = compute_existing(bundle, kAllModels, window, fraction);
    const double existing_headline = result.existing.headline_total_wh();
    if (existing_headline == 0.0) {
        throw Error("existing-boundary headline is zero");
    }
    result.ratio = result.comprehensive.total_wh / existing_headline;
    result.scaling_factor =
        boundary_scaling_factor(result.comprehensive, result.comprehensive.active_accel_wh);
    return result;
}

double fleet_average_pue(const Bundle& bundle, const DateWindow& window) {
    auto weights = campus_it_energy_wh(bundle, window);
    if (weights.empty()) {
        throw Error("empty window: no telemetry between " + window.from.to_string() + " and " +
                    window.to.to_string());
    }
    // Every campus in the weights map has a PUE: join_hours validated that.
    std::map<std::string, double> pue;
    for (const auto& [campus, weight] : weights) {
        (void)weight;
        const FactorSet& fs = factors_for_date(window.from, bundle.factors);
        auto it = fs.pue_by_campus.find(campus);
        if (it != fs.pue_by_campus.end()) pue[campus] = it->second;
    }
    return fleet_weighted_factor(pue, weights);
}

} // namespace fleetmeter
