#pragma once

#include "fleetmeter/time.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace fleetmeter {

/// One machine-hour of measured tray power for one machine. Powers are hourly
/// averages in watts; the total is definitional and never stored.
struct PowerSample {
    std::string machine_id;
    std::string campus_id;
    UtcHour hour;
    double p_host_w = 0.0;  // CPU + DRAM tray
    double p_accel_w = 0.0; // accelerator trays

    double p_total_w() const { return p_host_w + p_accel_w; }
};

/// One machine-hour of job assignment. Times are fractions of the hour:
/// 0 <= t_idle <= t_total <= 1, t_total > 0.
struct AllocationRecord {
    std::string machine_id;
    std::string model_id;
    std::string job_id;
    UtcHour hour;
    double t_total_h = 0.0;
    double t_idle_h = 0.0;
    double p_idle_w = 0.0; // machine baseline idle power
};

/// Prompt count for one model, one data center, one day.
struct PromptTally {
    std::string model_id;
    std::string datacenter_id; // same namespace as campus_id
    UtcDay day;
    std::uint64_t q = 0;
};

/// Per-calendar-year conversion factors. Applied to records of the following
/// year (previous-calendar-year convention).
struct FactorSet {
    int year = 0;
    std::map<std::string, double> pue_by_campus;            // each >= 1.0
    double wue_l_per_kwh = 0.0;                             // fleet freshwater, Category 2
    double ef_mb_g_per_kwh = 0.0;                           // market-based
    std::optional<double> ef_lb_g_per_kwh;                  // location-based, informational
    std::map<std::string, double> embodied_g_per_machine_hour; // amortized Scope 1+3 by hardware class
};

using FactorTable = std::map<int, FactorSet>;

/// Joins machines to campuses and embodied-rate hardware classes.
struct MachineSpec {
    std::string machine_id;
    std::string hardware_class;
    std::string campus_id;
};

/// Absolute energy decomposition over a window, in Wh.
/// Identity: e_total = e_overhead + e_idle + e_active_host + e_active_accel.
struct EnergyComponents {
    double e_total_wh = 0.0;
    double e_overhead_wh = 0.0;
    double e_idle_wh = 0.0;
    double e_active_host_wh = 0.0;
    double e_active_accel_wh = 0.0;
    double machine_hours = 0.0; // sum of t_total, for embodied amortization
    DateWindow window{};
    std::string model_id = "ALL";

    double component_sum_wh() const {
        return e_overhead_wh + e_idle_wh + e_active_host_wh + e_active_accel_wh;
    }
};

/// Which measurement boundary a per-prompt figure was computed under.
enum class Boundary { comprehensive, existing };

const char* to_string(Boundary b);

/// Per-prompt energy decomposition in Wh/prompt. Under the existing boundary
/// only active accelerator energy counts toward the headline; the other
/// components are recorded but excluded.
struct PerPromptEnergy {
    double total_wh = 0.0;
    double overhead_wh = 0.0;
    double idle_wh = 0.0;
    double active_host_wh = 0.0;
    double active_accel_wh = 0.0;
    std::uint64_t q = 0;
    Boundary boundary = Boundary::comprehensive;

    double headline_total_wh() const {
        return boundary == Boundary::existing ? active_accel_wh : total_wh;
    }
    double headline_overhead_wh() const {
        return boundary == Boundary::existing ? 0.0 : overhead_wh;
    }
};

struct EmissionsPerPrompt {
    double scope2_mb_g = 0.0; // grid electricity, market-based
    double scope1_3_g = 0.0;  // embodied, amortized per machine-hour
    double total_g = 0.0;
};

struct WaterPerPrompt {
    double consumption_ml = 0.0;
};

/// Per-datacenter daily efficiency under the existing-approach subsample.
/// `components` carries the full decomposition so excluded columns can still
/// be reported.
struct DcEfficiencyRow {
    std::string datacenter_id;
    UtcDay day;
    double accel_energy_wh = 0.0;
    std::uint64_t q = 0;
    double energy_per_prompt = 0.0; // accel_energy_wh / q
    EnergyComponents components{};
};

/// One model in the energy-ranked cumulative prompt distribution.
struct ModelRankRow {
    std::string model_id;
    double energy_per_prompt = 0.0; // model average over the window, total Wh/prompt
    std::uint64_t q = 0;
    std::uint64_t cumulative_q = 0;
    PerPromptEnergy energy{}; // full component vector for the median report
};

struct MedianReport {
    DateWindow window{};
    std::string median_model_id;
    PerPromptEnergy energy{};
    EmissionsPerPrompt emissions{};
    WaterPerPrompt water{};
    std::uint64_t total_q = 0;
    double mean_energy_wh = 0.0; // prompt-weighted mean, diagnostic only
};

struct TrendReport {
    YearMonth period_start{};
    YearMonth period_end{};
    double energy_reduction = 0.0;
    double scope2_reduction = 0.0;
    double scope1_3_reduction = 0.0;
    double total_emissions_reduction = 0.0;
};

} // namespace fleetmeter
