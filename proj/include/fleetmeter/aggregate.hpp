#pragma once

#include "fleetmeter/energy.hpp"
#include "fleetmeter/footprint.hpp"
#include "fleetmeter/types.hpp"

#include <span>
#include <utility>
#include <vector>

namespace fleetmeter {

struct ModelEntry {
    std::string model_id;
    PerPromptEnergy energy;
    std::uint64_t q = 0;
};

// Sorts ascending by total energy/prompt (ties by model_id) and accumulates
// the cumulative prompt distribution. Every q must be positive.
std::vector<ModelRankRow> rank_models(std::vector<ModelEntry> entries);

// The model serving the 50th-percentile prompt: the first row whose
// cumulative_q reaches ceil(total_q / 2). Fills the energy part of the report.
MedianReport median_prompt(std::span<const ModelRankRow> rows);

enum class MedianMode {
    pooled,          // pool energy and prompts per model over the window, then rank
    median_of_daily, // rank per day, report the median day's report
};

// Full median pipeline over a window: per-model aggregation, prompt tallies,
// ranking, percentile selection, and footprint conversion using the factor
// year of the window start.
MedianReport window_median(const Bundle& bundle, const DateWindow& window,
                           MedianMode mode = MedianMode::pooled);

// One report per day in the window that served prompts.
std::vector<std::pair<UtcDay, MedianReport>> daily_medians(const Bundle& bundle,
                                                           const DateWindow& window);

// One report per calendar month, from..to inclusive. Months without prompts
// raise an error.
std::vector<std::pair<YearMonth, MedianReport>> monthly_median_series(
    const Bundle& bundle, YearMonth from, YearMonth to, MedianMode mode = MedianMode::pooled);

// First-over-last reduction factors of a monthly series.
TrendReport trend_reductions(std::span<const std::pair<YearMonth, MedianReport>> series);

} // namespace fleetmeter
