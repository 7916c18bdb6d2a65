#include "fleetmeter/energy.hpp"

#include "fleetmeter/error.hpp"
#include "fleetmeter/kernels.hpp"

#include <algorithm>
#include <unordered_map>

namespace fleetmeter {

namespace {

// Missing-join reports are capped so a systematically broken bundle does not
// produce a megabyte of message.
constexpr std::size_t kMaxListed = 20;

[[noreturn]] void throw_joined(const char* what, const std::vector<std::string>& items) {
    std::string msg{what};
    msg += ": ";
    for (std::size_t i = 0; i < items.size() && i < kMaxListed; ++i) {
        if (i > 0) msg += "; ";
        msg += items[i];
    }
    if (items.size() > kMaxListed) {
        msg += "; and " + std::to_string(items.size() - kMaxListed) + " more";
    }
    throw Error(std::move(msg));
}

struct SampleKey {
    std::string_view machine;
    std::int64_t hour;
    bool operator==(const SampleKey&) const = default;
};

struct SampleKeyHash {
    std::size_t operator()(const SampleKey& k) const {
        std::size_t h = std::hash<std::string_view>{}(k.machine);
        return h ^ (std::hash<std::int64_t>{}(k.hour) + 0x9e3779b97f4a7c15ull + (h << 6));
    }
};

const FactorSet* find_factor_year(const FactorTable& factors, int year) {
    auto it = factors.find(year);
    return it == factors.end() ? nullptr : &it->second;
}

// Fills the SoA batch, validates idle-vs-measured energy per row, runs the
// selected kernel, and block-reduces each component.
EnergyComponents reduce_rows(std::span<const JoinedHour> rows, const DateWindow& window,
                             const std::string& model_label) {
    EnergyComponents result;
    result.window = window;
    result.model_id = model_label;
    if (rows.empty()) return result;

    const std::size_t n = rows.size();
    std::vector<double> p_host(n), p_accel(n), t_total(n), t_idle(n), p_idle(n), pue(n);
    std::vector<std::string> bad;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = rows[i];
        p_host[i] = r.sample->p_host_w;
        p_accel[i] = r.sample->p_accel_w;
        t_total[i] = r.alloc->t_total_h;
        t_idle[i] = r.alloc->t_idle_h;
        p_idle[i] = r.alloc->p_idle_w;
        pue[i] = r.pue;
        if (p_idle[i] * t_idle[i] > (p_host[i] + p_accel[i]) * t_total[i]) {
            bad.push_back(r.alloc->machine_id + "@" + r.alloc->hour.to_string());
        }
    }
    if (!bad.empty()) {
        throw_joined("idle energy exceeds measured energy", bad);
    }

    std::vector<double> total(n), overhead(n), idle(n), active_host(n), active_accel(n);
    kernels::MachineHourView in{p_host.data(), p_accel.data(), t_total.data(),
                                t_idle.data(), p_idle.data(), pue.data(), n};
    kernels::ComponentArrays out{total.data(), overhead.data(), idle.data(),
                                 active_host.data(), active_accel.data()};
    kernels::select_kernel().fn(in, out);

    const unsigned workers = kernels::resolve_thread_count();
    result.e_total_wh = kernels::block_sum(total, workers);
    result.e_overhead_wh = kernels::block_sum(overhead, workers);
    result.e_idle_wh = kernels::block_sum(idle, workers);
    result.e_active_host_wh = kernels::block_sum(active_host, workers);
    result.e_active_accel_wh = kernels::block_sum(active_accel, workers);
    result.machine_hours = kernels::block_sum(t_total, workers);
    return result;
}

} // namespace

EnergyComponents machine_hour_components(const PowerSample& sample,
                                         const AllocationRecord& alloc, double pue) {
    if (sample.machine_id != alloc.machine_id || sample.hour != alloc.hour) {
        throw Error("power sample and allocation do not share (machine_id, hour)");
    }
    if (pue < 1.0) {
        throw Error("PUE below 1.0 for machine " + sample.machine_id);
    }
    JoinedHour row{&alloc, &sample, nullptr, pue};
    DateWindow window{alloc.hour.day(), alloc.hour.day()};
    return reduce_rows(std::span{&row, 1}, window, alloc.model_id);
}

std::vector<JoinedHour> join_hours(const Bundle& bundle, const HourFilter& filter) {
    std::unordered_map<SampleKey, const PowerSample*, SampleKeyHash> samples;
    samples.reserve(bundle.power.size());
    for (const auto& s : bundle.power) {
        samples.emplace(SampleKey{s.machine_id, s.hour.count()}, &s);
    }
    std::unordered_map<std::string_view, const MachineSpec*> machines;
    machines.reserve(bundle.machines.size());
    for (const auto& m : bundle.machines) machines.emplace(m.machine_id, &m);

    std::vector<JoinedHour> rows;
    std::vector<std::string> missing_samples;
    std::vector<std::string> missing_machines;
    std::vector<std::string> missing_factors;

    for (const auto& a : bundle.allocations) {
        if (filter.window && !filter.window->contains(a.hour.day())) continue;
        if (filter.models && !filter.models->count(a.model_id)) continue;

        JoinedHour row;
        row.alloc = &a;
        auto sit = samples.find(SampleKey{a.machine_id, a.hour.count()});
        if (sit == samples.end()) {
            missing_samples.push_back(a.machine_id + "@" + a.hour.to_string());
            continue;
        }
        row.sample = sit->second;
        auto mit = machines.find(a.machine_id);
        if (mit == machines.end()) {
            missing_machines.push_back(a.machine_id);
            continue;
        }
        row.machine = mit->second;

        const int factor_year = a.hour.day().year() - 1;
        const FactorSet* fs = find_factor_year(bundle.factors, factor_year);
        if (fs == nullptr) {
            missing_factors.push_back("year " + std::to_string(factor_year) + " (for " +
                                      a.hour.day().to_string() + ")");
            continue;
        }
        auto pit = fs->pue_by_campus.find(row.machine->campus_id);
        if (pit == fs->pue_by_campus.end()) {
            missing_factors.push_back("PUE for campus " + row.machine->campus_id + ", year " +
                                      std::to_string(factor_year));
            continue;
        }
        row.pue = pit->second;
        rows.push_back(row);
    }

    if (!missing_samples.empty()) {
        throw_joined("allocations without power samples", missing_samples);
    }
    if (!missing_machines.empty()) {
        std::sort(missing_machines.begin(), missing_machines.end());
        missing_machines.erase(std::unique(missing_machines.begin(), missing_machines.end()),
                               missing_machines.end());
        throw_joined("machines missing from machines.csv", missing_machines);
    }
    if (!missing_factors.empty()) {
        std::sort(missing_factors.begin(), missing_factors.end());
        missing_factors.erase(std::unique(missing_factors.begin(), missing_factors.end()),
                              missing_factors.end());
        throw_joined("missing conversion factors", missing_factors);
    }

    // Deterministic reduction order; input position breaks the final tie so
    // exact-duplicate allocations keep a stable order.
    std::stable_sort(rows.begin(), rows.end(), [](const JoinedHour& a, const JoinedHour& b) {
        if (int c = a.alloc->machine_id.compare(b.alloc->machine_id); c != 0) return c < 0;
        if (a.alloc->hour != b.alloc->hour) return a.alloc->hour < b.alloc->hour;
        if (int c = a.alloc->model_id.compare(b.alloc->model_id); c != 0) return c < 0;
        return a.alloc->job_id < b.alloc->job_id;
    });
    return rows;
}

EnergyComponents reduce_hours(std::span<const JoinedHour> rows, const DateWindow& window,
                              const std::string& model_label) {
    return reduce_rows(rows, window, model_label);
}

EnergyComponents aggregate_components(const Bundle& bundle, const std::string& model_id,
                                      const DateWindow& window) {
    if (!window.valid()) throw Error("empty window: from is after to");
    HourFilter filter;
    filter.window = window;
    std::set<std::string> one;
    if (model_id != kAllModels) {
        one.insert(model_id);
        filter.models = &one;
    }
    auto rows = join_hours(bundle, filter);
    return reduce_rows(rows, window, model_id);
}

PerPromptEnergy per_prompt_energy(const EnergyComponents& components, std::uint64_t q) {
    if (q == 0) throw Error("zero prompt count");
    const double qd = static_cast<double>(q);
    PerPromptEnergy pp;
    pp.total_wh = components.e_total_wh / qd;
    pp.overhead_wh = components.e_overhead_wh / qd;
    pp.idle_wh = components.e_idle_wh / qd;
    pp.active_host_wh = components.e_active_host_wh / qd;
    pp.active_accel_wh = components.e_active_accel_wh / qd;
    pp.q = q;
    pp.boundary = Boundary::comprehensive;
    return pp;
}

std::map<std::string, ModelAggregate> aggregate_by_model(const Bundle& bundle,
                                                         const DateWindow& window) {
    if (!window.valid()) throw Error("empty window: from is after to");
    HourFilter filter;
    filter.window = window;
    auto rows = join_hours(bundle, filter);

    // Rows stay in global deterministic order; bucketing preserves each
    // model's subsequence order.
    std::map<std::string, std::vector<JoinedHour>> buckets;
    for (const auto& row : rows) buckets[row.alloc->model_id].push_back(row);

    std::map<std::string, ModelAggregate> result;
    for (auto& [model, model_rows] : buckets) {
        ModelAggregate agg;
        agg.components = reduce_rows(model_rows, window, model);
        std::map<std::string, std::vector<double>> hours_by_hw;
        for (const auto& row : model_rows) {
            hours_by_hw[row.machine->hardware_class].push_back(row.alloc->t_total_h);
        }
        for (const auto& [hw, hours] : hours_by_hw) {
            agg.machine_hours_by_hw[hw] = kernels::block_sum(hours);
        }
        result.emplace(model, std::move(agg));
    }
    return result;
}

std::map<std::string, double> campus_it_energy_wh(const Bundle& bundle,
                                                  const DateWindow& window) {
    HourFilter filter;
    filter.window = window;
    auto rows = join_hours(bundle, filter);
    std::map<std::string, std::vector<double>> per_campus;
    for (const auto& row : rows) {
        per_campus[row.machine->campus_id].push_back(row.sample->p_total_w() *
                                                     row.alloc->t_total_h);
    }
    std::map<std::string, double> result;
    for (const auto& [campus, values] : per_campus) {
        result[campus] = kernels::block_sum(values);
    }
    return result;
}

} // namespace fleetmeter
