#include "fleetmeter/synthfleet.hpp"

#include "fleetmeter/csv.hpp"
#include "fleetmeter/error.hpp"
#include "fleetmeter/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace fleetmeter {

namespace {

using json = nlohmann::ordered_json;

std::string dc_id(int k) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "dc-%03d", k);
    return buf;
}

std::string machine_id(int dc, int m) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "m-%03d-%05d", dc, m);
    return buf;
}

double monthly(const std::vector<double>& table, int month_index) {
    if (table.empty()) return 1.0;
    return table[static_cast<std::size_t>(month_index)];
}

} // namespace

void ScenarioConfig::validate() const {
    if (days < 1 || datacenters < 1 || machines_per_dc < 1) {
        throw Error("scenario counts must be >= 1");
    }
    if (jitter < 0.0 || jitter > 0.5) throw Error("jitter must be in [0, 0.5]");
    if (dc_prompt_rate_spread < 0.0 || dc_prompt_rate_spread >= 2.0) {
        throw Error("dc_prompt_rate_spread must be in [0, 2)");
    }
    if (models.empty()) throw Error("scenario requires at least one model");
    for (const auto& m : models) {
        if (m.model_id.empty() || m.hardware_class.empty()) {
            throw Error("model entries need model_id and hardware_class");
        }
        if (m.mean_p_host_w < 0 || m.mean_p_accel_w < 0 || m.p_idle_w < 0) {
            throw Error("model " + m.model_id + ": negative power mean");
        }
        if (!(m.prompts_per_machine_hour > 0)) {
            throw Error("model " + m.model_id + ": prompts_per_machine_hour must be positive");
        }
        if (m.idle_fraction < 0.0 || m.idle_fraction >= 1.0) {
            throw Error("model " + m.model_id + ": idle_fraction must be in [0, 1)");
        }
        // Keeps idle energy <= measured energy for every jitter draw: the
        // same multiplier scales tray and idle power.
        if (m.p_idle_w * m.idle_fraction > m.mean_p_host_w + m.mean_p_accel_w) {
            throw Error("model " + m.model_id + ": idle power times idle fraction exceeds mean machine power");
        }
    }
    if (pue_per_dc.size() != 1 && pue_per_dc.size() != static_cast<std::size_t>(datacenters)) {
        throw Error("pue_per_dc must hold one value or one per datacenter");
    }
    for (double p : pue_per_dc) {
        if (p < 1.0) throw Error("PUE below 1.0 in pue_per_dc");
    }
    if (factor_years.empty()) throw Error("scenario requires an embedded factor table");
    for (const auto& [year, fs] : factor_years) {
        for (const auto& m : models) {
            if (!fs.embodied_g_per_machine_hour.count(m.hardware_class)) {
                throw Error("factor year " + std::to_string(year) +
                            " lacks an embodied rate for hardware class " + m.hardware_class);
            }
        }
    }
    const int span = months_between(YearMonth::of(start_day),
                                    YearMonth::of(start_day.plus_days(days - 1))) +
                     1;
    for (const auto* table : {&monthly_efficiency_multiplier, &monthly_power_multiplier}) {
        if (table->empty()) continue;
        if (static_cast<int>(table->size()) < span) {
            throw Error("monthly multiplier table shorter than the scenario month span");
        }
        for (double v : *table) {
            if (!(v > 0)) throw Error("monthly multipliers must be positive");
        }
    }
}

SyntheticBundle generate_scenario(const ScenarioConfig& config) {
    config.validate();

    const int n_dc = config.datacenters;
    const int n_machines = config.machines_per_dc;
    const int n_models = static_cast<int>(config.models.size());

    std::vector<double> dc_rate(n_dc, 1.0);
    if (n_dc > 1 && config.dc_prompt_rate_spread > 0.0) {
        for (int k = 0; k < n_dc; ++k) {
            dc_rate[k] = 1.0 + config.dc_prompt_rate_spread *
                                   (static_cast<double>(k) / (n_dc - 1) - 0.5);
        }
    }

    std::vector<PowerSample> power;
    std::vector<AllocationRecord> allocs;
    std::vector<PromptTally> tallies;
    std::vector<MachineSpec> machines;
    power.reserve(static_cast<std::size_t>(config.days) * n_dc * n_machines * 24);
    allocs.reserve(power.capacity());

    for (int d = 0; d < n_dc; ++d) {
        for (int m = 0; m < n_machines; ++m) {
            const ModelProfile& model = config.models[m % n_models];
            machines.push_back({machine_id(d, m), model.hardware_class, dc_id(d)});
        }
    }

    for (int day_idx = 0; day_idx < config.days; ++day_idx) {
        const UtcDay day = config.start_day.plus_days(day_idx);
        const int month_idx = months_between(YearMonth::of(config.start_day), YearMonth::of(day));
        const double mu = monthly(config.monthly_efficiency_multiplier, month_idx);
        const double pi = monthly(config.monthly_power_multiplier, month_idx);

        for (int d = 0; d < n_dc; ++d) {
            const std::string campus = dc_id(d);
            for (int m = 0; m < n_machines; ++m) {
                const ModelProfile& model = config.models[m % n_models];
                const std::string mid = machine_id(d, m);
                const std::string job = "j-" + model.model_id + "-" + campus;
                const std::uint64_t machine_ord =
                    static_cast<std::uint64_t>(d) * n_machines + m;
                for (int h = 0; h < 24; ++h) {
                    const std::uint64_t hour_ord =
                        static_cast<std::uint64_t>(day_idx) * 24 + h;
                    const double u = 1.0 + config.jitter *
                                               (2.0 * keyed_unit(config.seed, "jitter",
                                                                 machine_ord, hour_ord) -
                                                1.0);
                    const UtcHour hour{day.count() * 24 + h};
                    PowerSample ps;
                    ps.machine_id = mid;
                    ps.campus_id = campus;
                    ps.hour = hour;
                    ps.p_host_w = model.mean_p_host_w * pi * u;
                    ps.p_accel_w = model.mean_p_accel_w * pi * u;
                    power.push_back(std::move(ps));

                    AllocationRecord ar;
                    ar.machine_id = mid;
                    ar.model_id = model.model_id;
                    ar.job_id = job;
                    ar.hour = hour;
                    ar.t_total_h = 1.0;
                    ar.t_idle_h = model.idle_fraction;
                    ar.p_idle_w = model.p_idle_w * pi * u;
                    allocs.push_back(std::move(ar));
                }
            }

            for (int mi = 0; mi < n_models; ++mi) {
                const ModelProfile& model = config.models[mi];
                int count = 0;
                for (int m = mi; m < n_machines; m += n_models) ++count;
                if (count == 0) continue;
                const double expected =
                    model.prompts_per_machine_hour * dc_rate[d] * mu * count * 24.0;
                const auto q = static_cast<std::uint64_t>(std::llround(expected));
                if (q == 0) continue;
                tallies.push_back({model.model_id, campus, day, q});
            }
        }
    }

    // Campus PUEs come from the scenario, overriding whatever the embedded
    // factor table carries.
    FactorTable factors = config.factor_years;
    for (auto& [year, fs] : factors) {
        for (int d = 0; d < n_dc; ++d) {
            fs.pue_by_campus[dc_id(d)] =
                config.pue_per_dc.size() == 1 ? config.pue_per_dc[0] : config.pue_per_dc[d];
        }
    }

    SyntheticBundle bundle;
    bundle.power_csv = to_csv(power);
    bundle.alloc_csv = to_csv(allocs);
    bundle.prompts_csv = to_csv(tallies);
    bundle.machines_csv = to_csv(machines);
    bundle.factors_json = to_json(factors);
    return bundle;
}

void SyntheticBundle::write_to(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    auto write = [&](const char* name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw Error("cannot write " + (dir / name).string());
        out << content;
    };
    write(kPowerCsv, power_csv);
    write(kAllocCsv, alloc_csv);
    write(kPromptsCsv, prompts_csv);
    write(kMachinesCsv, machines_csv);
    write(kFactorsJson, factors_json);
}

Bundle SyntheticBundle::parse() const {
    Bundle b;
    b.power = parse_power_samples(power_csv);
    b.allocations = parse_allocations(alloc_csv);
    b.tallies = parse_prompt_tallies(prompts_csv);
    b.machines = parse_machines(machines_csv);
    b.factors = load_factors(factors_json);
    return b;
}

ScenarioConfig calibrate_table1(const CalibrationTargets& t) {
    for (double v : {t.accel_wh, t.host_wh, t.idle_wh, t.overhead_wh, t.existing_accel_wh,
                     t.scope1_3_g, t.ef_mb_g_per_kwh, t.wue_l_per_kwh}) {
        if (v < 0.0 || !std::isfinite(v)) throw Error("calibration targets must be non-negative");
    }
    const double total = t.accel_wh + t.host_wh + t.idle_wh + t.overhead_wh;
    if (!(total > 0.0)) throw Error("calibration targets are all zero");
    if (t.overhead_wh >= total) {
        throw Error("overhead share implies an unbounded PUE");
    }
    const double it_energy = total - t.overhead_wh; // active + idle
    const double pue = total / it_energy;
    const double active = t.accel_wh + t.host_wh;

    constexpr double kMachinePowerW = 2000.0;
    ScenarioConfig config;
    config.seed = 42;
    config.start_day = UtcDay::from_civil(2025, 5, 1);
    config.days = 31;
    config.datacenters = 10;
    config.machines_per_dc = 4;
    config.jitter = 0.10;

    ModelProfile model;
    model.model_id = "gem-text";
    model.hardware_class = "tpu-v5e";
    if (active > 0.0) {
        model.mean_p_host_w = kMachinePowerW * t.host_wh / active;
        model.mean_p_accel_w = kMachinePowerW * t.accel_wh / active;
    } else {
        model.mean_p_host_w = 0.0;
        model.mean_p_accel_w = kMachinePowerW;
    }
    if (t.idle_wh > 0.0) {
        model.idle_fraction = 0.25;
        model.p_idle_w = kMachinePowerW * t.idle_wh / (it_energy * model.idle_fraction);
    } else {
        model.idle_fraction = 0.0;
        model.p_idle_w = 0.0;
    }
    // Prompts per machine-hour from the per-prompt total: each machine-hour
    // measures kMachinePowerW * PUE watt-hours.
    const double rate = kMachinePowerW * pue / total;
    model.prompts_per_machine_hour = rate;
    config.models.push_back(model);

    if (t.accel_wh > 0.0 && t.existing_accel_wh < t.accel_wh) {
        if (!(t.existing_accel_wh > 0.0)) {
            throw Error("existing-boundary target must be positive when accel target is");
        }
        const double ratio = t.accel_wh / t.existing_accel_wh;
        if (ratio >= 2.0) {
            throw Error("existing-boundary target below half the fleet accel target is infeasible");
        }
        config.dc_prompt_rate_spread = 2.0 * (ratio - 1.0);
    } else if (t.existing_accel_wh > t.accel_wh) {
        throw Error("existing-boundary target cannot exceed the fleet accel target");
    }

    config.pue_per_dc = {pue};

    FactorSet fs;
    fs.year = config.start_day.year() - 1;
    fs.wue_l_per_kwh = t.wue_l_per_kwh;
    fs.ef_mb_g_per_kwh = t.ef_mb_g_per_kwh;
    fs.embodied_g_per_machine_hour[model.hardware_class] = t.scope1_3_g * rate;
    config.factor_years.emplace(fs.year, std::move(fs));
    return config;
}

EnergyComponents oracle_energy(const Bundle& bundle, const std::string& model_id) {
    std::map<std::pair<std::string, std::int64_t>, const PowerSample*> samples;
    for (const auto& s : bundle.power) samples.emplace(std::pair{s.machine_id, s.hour.count()}, &s);
    std::map<std::string, const MachineSpec*> machines;
    for (const auto& m : bundle.machines) machines.emplace(m.machine_id, &m);

    long double total = 0, overhead = 0, idle = 0, active_host = 0, active_accel = 0;
    long double machine_hours = 0;
    bool any = false;
    UtcDay first_day, last_day;

    for (const auto& a : bundle.allocations) {
        if (model_id != "ALL" && a.model_id != model_id) continue;
        auto sit = samples.find({a.machine_id, a.hour.count()});
        if (sit == samples.end()) {
            throw Error("allocations without power samples: " + a.machine_id + "@" +
                        a.hour.to_string());
        }
        auto mit = machines.find(a.machine_id);
        if (mit == machines.end()) {
            throw Error("machines missing from machines.csv: " + a.machine_id);
        }
        auto fit = bundle.factors.find(a.hour.day().year() - 1);
        if (fit == bundle.factors.end()) {
            throw Error("missing conversion factors: year " +
                        std::to_string(a.hour.day().year() - 1));
        }
        auto pit = fit->second.pue_by_campus.find(mit->second->campus_id);
        if (pit == fit->second.pue_by_campus.end()) {
            throw Error("missing conversion factors: PUE for campus " + mit->second->campus_id);
        }

        const PowerSample& s = *sit->second;
        const long double p_total = static_cast<long double>(s.p_host_w) + s.p_accel_w;
        const long double base = p_total * a.t_total_h;
        const long double e_idle = static_cast<long double>(a.p_idle_w) * a.t_idle_h;
        if (static_cast<double>(e_idle) > static_cast<double>(base)) {
            throw Error("idle energy exceeds measured energy: " + a.machine_id + "@" +
                        a.hour.to_string());
        }
        const long double active = base - e_idle;
        total += base * pit->second;
        overhead += base * (pit->second - 1.0L);
        idle += e_idle;
        if (p_total != 0.0L) {
            active_host += active * (s.p_host_w / p_total);
            active_accel += active * (s.p_accel_w / p_total);
        }
        machine_hours += a.t_total_h;

        const UtcDay day = a.hour.day();
        if (!any || day < first_day) first_day = day;
        if (!any || last_day < day) last_day = day;
        any = true;
    }

    EnergyComponents result;
    result.model_id = model_id;
    if (any) result.window = DateWindow{first_day, last_day};
    result.e_total_wh = static_cast<double>(total);
    result.e_overhead_wh = static_cast<double>(overhead);
    result.e_idle_wh = static_cast<double>(idle);
    result.e_active_host_wh = static_cast<double>(active_host);
    result.e_active_accel_wh = static_cast<double>(active_accel);
    result.machine_hours = static_cast<double>(machine_hours);
    return result;
}

double oracle_median(std::span<const OracleModelEntry> table) {
    if (table.empty()) throw Error("cannot take the median of an empty table");
    std::uint64_t total = 0;
    for (const auto& e : table) total += e.q;
    if (total == 0) throw Error("zero prompt count");
    constexpr std::uint64_t kMaxVirtualPrompts = 50'000'000;
    if (total > kMaxVirtualPrompts) {
        throw Error("oracle_median expansion too large (" + std::to_string(total) + " prompts)");
    }

    std::vector<double> prompts;
    prompts.reserve(total);
    for (const auto& e : table) {
        prompts.insert(prompts.end(), e.q, e.energy_per_prompt);
    }
    std::sort(prompts.begin(), prompts.end());
    const std::uint64_t index = (total + 1) / 2; // ceil(total / 2), 1-based
    return prompts[index - 1];
}

namespace {

ModelProfile model_from_json(const json& j) {
    ModelProfile m;
    m.model_id = j.at("model_id").get<std::string>();
    m.hardware_class = j.at("hardware_class").get<std::string>();
    m.mean_p_host_w = j.at("mean_p_host_w").get<double>();
    m.mean_p_accel_w = j.at("mean_p_accel_w").get<double>();
    m.prompts_per_machine_hour = j.at("prompts_per_machine_hour").get<double>();
    m.idle_fraction = j.at("idle_fraction").get<double>();
    m.p_idle_w = j.at("p_idle_w").get<double>();
    return m;
}

} // namespace

ScenarioConfig ScenarioConfig::from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("invalid scenario config: ") + e.what());
    }
    try {
        ScenarioConfig c;
        c.seed = doc.value("seed", std::uint64_t{42});
        c.start_day = UtcDay::parse(doc.value("start_day", std::string("2025-05-01")));
        c.days = doc.value("days", 1);
        c.datacenters = doc.value("datacenters", 1);
        c.machines_per_dc = doc.value("machines_per_dc", 1);
        c.jitter = doc.value("jitter", 0.10);
        c.dc_prompt_rate_spread = doc.value("dc_prompt_rate_spread", 0.0);
        for (const auto& m : doc.at("models")) c.models.push_back(model_from_json(m));
        const auto& pue = doc.at("pue_per_dc");
        if (pue.is_number()) {
            c.pue_per_dc = {pue.get<double>()};
        } else {
            c.pue_per_dc = pue.get<std::vector<double>>();
        }
        if (doc.contains("monthly_efficiency_multiplier")) {
            c.monthly_efficiency_multiplier =
                doc["monthly_efficiency_multiplier"].get<std::vector<double>>();
        }
        if (doc.contains("monthly_power_multiplier")) {
            c.monthly_power_multiplier =
                doc["monthly_power_multiplier"].get<std::vector<double>>();
        }
        c.factor_years = load_factors(doc.at("factor_years").dump());
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw Error(std::string("invalid scenario config: ") + e.what());
    }
}

std::string ScenarioConfig::to_json() const {
    json doc;
    doc["seed"] = seed;
    doc["start_day"] = start_day.to_string();
    doc["days"] = days;
    doc["datacenters"] = datacenters;
    doc["machines_per_dc"] = machines_per_dc;
    doc["jitter"] = jitter;
    doc["dc_prompt_rate_spread"] = dc_prompt_rate_spread;
    json models_json = json::array();
    for (const auto& m : models) {
        json mj;
        mj["model_id"] = m.model_id;
        mj["hardware_class"] = m.hardware_class;
        mj["mean_p_host_w"] = m.mean_p_host_w;
        mj["mean_p_accel_w"] = m.mean_p_accel_w;
        mj["prompts_per_machine_hour"] = m.prompts_per_machine_hour;
        mj["idle_fraction"] = m.idle_fraction;
        mj["p_idle_w"] = m.p_idle_w;
        models_json.push_back(std::move(mj));
    }
    doc["models"] = std::move(models_json);
    doc["pue_per_dc"] = pue_per_dc;
    if (!monthly_efficiency_multiplier.empty()) {
        doc["monthly_efficiency_multiplier"] = monthly_efficiency_multiplier;
    }
    if (!monthly_power_multiplier.empty()) {
        doc["monthly_power_multiplier"] = monthly_power_multiplier;
    }
    doc["factor_years"] = json::parse(fleetmeter::to_json(factor_years));
    return doc.dump(2) + "\n";
}

} // namespace fleetmeter
