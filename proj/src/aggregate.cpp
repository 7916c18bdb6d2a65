#include "fleetmeter/aggregate.hpp"

#include "fleetmeter/error.hpp"

#include <algorithm>

namespace fleetmeter {

std::vector<ModelRankRow> rank_models(std::vector<ModelEntry> entries) {
    if (entries.empty()) throw Error("cannot rank an empty model table");
    for (const auto& e : entries) {
        if (e.q == 0) throw Error("model " + e.model_id + " has zero prompt count");
    }
    std::sort(entries.begin(), entries.end(), [](const ModelEntry& a, const ModelEntry& b) {
        if (a.energy.total_wh != b.energy.total_wh) return a.energy.total_wh < b.energy.total_wh;
        return a.model_id < b.model_id;
    });

    std::vector<ModelRankRow> rows;
    rows.reserve(entries.size());
    std::uint64_t cumulative = 0;
    for (auto& e : entries) {
        cumulative += e.q;
        ModelRankRow row;
        row.model_id = e.model_id;
        row.energy_per_prompt = e.energy.total_wh;
        row.q = e.q;
        row.cumulative_q = cumulative;
        row.energy = e.energy;
        rows.push_back(std::move(row));
    }
    return rows;
}

MedianReport median_prompt(std::span<const ModelRankRow> rows) {
    if (rows.empty()) throw Error("cannot take the median of an empty ranking");
    const std::uint64_t total_q = rows.back().cumulative_q;
    const std::uint64_t median_index = (total_q + 1) / 2; // ceil(total_q / 2)
    const ModelRankRow* median = nullptr;
    for (const auto& row : rows) {
        if (row.cumulative_q >= median_index) {
            median = &row;
            break;
        }
    }

    MedianReport report;
    report.median_model_id = median->model_id;
    report.energy = median->energy;
    report.total_q = total_q;
    return report;
}

namespace {

std::map<std::string, std::uint64_t> prompts_by_model(const Bundle& bundle,
                                                      const DateWindow& window) {
    std::map<std::string, std::uint64_t> q;
    for (const auto& t : bundle.tallies) {
        if (window.contains(t.day)) q[t.model_id] += t.q;
    }
    return q;
}

MedianReport pooled_median(const Bundle& bundle, const DateWindow& window) {
    auto per_model = aggregate_by_model(bundle, window);
    auto prompts = prompts_by_model(bundle, window);

    std::vector<ModelEntry> entries;
    double fleet_energy_wh = 0.0;
    std::uint64_t fleet_q = 0;
    for (const auto& [model, q] : prompts) {
        if (q == 0) continue;
        auto it = per_model.find(model);
        if (it == per_model.end()) {
            throw Error("model " + model + " served prompts in the window but has no telemetry");
        }
        entries.push_back({model, per_prompt_energy(it->second.components, q), q});
        fleet_energy_wh += it->second.components.e_total_wh;
        fleet_q += q;
    }
    if (entries.empty()) {
        throw Error("empty window: no prompts between " + window.from.to_string() + " and " +
                    window.to.to_string());
    }

    auto rows = rank_models(std::move(entries));
    MedianReport report = median_prompt(rows);
    report.window = window;
    report.mean_energy_wh = fleet_energy_wh / static_cast<double>(fleet_q);

    const FactorSet& factors = factors_for_date(window.from, bundle.factors);
    const auto& median_agg = per_model.at(report.median_model_id);
    report.emissions = emissions_per_prompt(report.energy, factors,
                                            median_agg.machine_hours_by_hw, report.energy.q);
    report.water = water_per_prompt(report.energy, factors);
    return report;
}

} // namespace

std::vector<std::pair<UtcDay, MedianReport>> daily_medians(const Bundle& bundle,
                                                           const DateWindow& window) {
    if (!window.valid()) throw Error("empty window: from is after to");
    std::set<std::int64_t> active_days;
    for (const auto& t : bundle.tallies) {
        if (window.contains(t.day) && t.q > 0) active_days.insert(t.day.count());
    }
    std::vector<std::pair<UtcDay, MedianReport>> result;
    for (std::int64_t d : active_days) {
        UtcDay day{d};
        result.emplace_back(day, pooled_median(bundle, DateWindow{day, day}));
    }
    return result;
}

MedianReport window_median(const Bundle& bundle, const DateWindow& window, MedianMode mode) {
    if (!window.valid()) throw Error("empty window: from is after to");
    if (mode == MedianMode::pooled) {
        return pooled_median(bundle, window);
    }

    auto days = daily_medians(bundle, window);
    if (days.empty()) {
        throw Error("empty window: no prompts between " + window.from.to_string() + " and " +
                    window.to.to_string());
    }
    // Median day by daily median energy; lower median, ties by day.
    std::vector<std::size_t> order(days.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ea = days[a].second.energy.total_wh;
        const double eb = days[b].second.energy.total_wh;
        if (ea != eb) return ea < eb;
        return days[a].first < days[b].first;
    });
    MedianReport report = days[order[(order.size() - 1) / 2]].second;
    report.window = window;
    return report;
}

std::vector<std::pair<YearMonth, MedianReport>> monthly_median_series(const Bundle& bundle,
                                                                      YearMonth from, YearMonth to,
                                                                      MedianMode mode) {
    if (months_between(from, to) < 0) throw Error("month range is empty");
    std::vector<std::pair<YearMonth, MedianReport>> series;
    for (YearMonth ym = from;; ym = ym.next()) {
        series.emplace_back(ym, window_median(bundle, ym.window(), mode));
        if (ym == to) break;
    }
    return series;
}

TrendReport trend_reductions(std::span<const std::pair<YearMonth, MedianReport>> series) {
    if (series.size() < 2) throw Error("trend requires at least two periods");
    const MedianReport& first = series.front().second;
    const MedianReport& last = series.back().second;

    auto ratio = [](double a, double b, const char* what) {
        if (b == 0.0) throw Error(std::string("last-period ") + what + " is zero");
        return a / b;
    };

    TrendReport trend;
    trend.period_start = series.front().first;
    trend.period_end = series.back().first;
    trend.energy_reduction =
        ratio(first.energy.headline_total_wh(), last.energy.headline_total_wh(), "energy");
    trend.scope2_reduction =
        ratio(first.emissions.scope2_mb_g, last.emissions.scope2_mb_g, "scope 2 emissions");
    trend.scope1_3_reduction =
        ratio(first.emissions.scope1_3_g, last.emissions.scope1_3_g, "scope 1+3 emissions");
    trend.total_emissions_reduction =
        ratio(first.emissions.total_g, last.emissions.total_g, "total emissions");
    return trend;
}

} // namespace fleetmeter
