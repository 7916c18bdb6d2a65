#pragma once

#include "fleetmeter/ingest.hpp"
#include "fleetmeter/types.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fleetmeter {

struct ModelProfile {
    std::string model_id;
    std::string hardware_class;
    double mean_p_host_w = 0.0;
    double mean_p_accel_w = 0.0;
    double prompts_per_machine_hour = 0.0; // per allocated machine-hour
    double idle_fraction = 0.0;            // [0, 1)
    double p_idle_w = 0.0;                 // machine baseline idle power
};

/// Synthetic fleet scenario. Deterministic for a given seed: identical
/// configs produce byte-identical bundles.
struct ScenarioConfig {
    std::uint64_t seed = 42;
    UtcDay start_day = UtcDay::from_civil(2025, 5, 1);
    int days = 1;
    int datacenters = 1;
    int machines_per_dc = 1;
    double jitter = 0.10; // uniform half-width around power means
    // Linear prompt-rate ramp across datacenters (mean 1): DC k gets
    // 1 + spread * (2k/(n-1) - 1) / 2. Zero = uniform fleet.
    double dc_prompt_rate_spread = 0.0;
    std::vector<ModelProfile> models;
    std::vector<double> pue_per_dc; // one per datacenter, or a single shared value
    // Per calendar month from start_day's month. Empty = flat 1.0.
    std::vector<double> monthly_efficiency_multiplier; // scales prompts/machine-hour
    std::vector<double> monthly_power_multiplier;      // scales tray power draw
    FactorTable factor_years;

    static ScenarioConfig from_json(std::string_view text);
    std::string to_json() const;
    void validate() const; // throws Error on invariant violations
};

/// Generated file contents in the ingest formats.
struct SyntheticBundle {
    std::string power_csv;
    std::string alloc_csv;
    std::string prompts_csv;
    std::string machines_csv;
    std::string factors_json;

    void write_to(const std::filesystem::path& dir) const;
    Bundle parse() const;
};

SyntheticBundle generate_scenario(const ScenarioConfig& config);

/// Per-prompt calibration targets, defaulting to the reference fleet figures.
struct CalibrationTargets {
    double accel_wh = 0.14;    // fleet-average active accelerator
    double host_wh = 0.06;     // active CPU & DRAM
    double idle_wh = 0.02;     // provisioned idle machines
    double overhead_wh = 0.02; // facility overhead
    double existing_accel_wh = 0.10; // top-decile accelerator-only headline
    double scope1_3_g = 0.010;       // embodied emissions per prompt
    double ef_mb_g_per_kwh = 94.0;
    double wue_l_per_kwh = 1.15;
};

// Solves the energy equations in closed form for a scenario whose pipeline
// output reproduces each target within +/-2%: PUE from the overhead share,
// tray power split from host/accel shares, idle power from the idle share,
// prompt rate from the total, datacenter rate spread from the existing-
// boundary target, and embodied rate from the Scope 1+3 target.
ScenarioConfig calibrate_table1(const CalibrationTargets& targets = {});

// Independent oracle: straight per-record loop, no batching, no sorting,
// extended-precision accumulation in input order. Same validation errors as
// the engine.
EnergyComponents oracle_energy(const Bundle& bundle, const std::string& model_id = "ALL");

struct OracleModelEntry {
    std::string model_id;
    double energy_per_prompt = 0.0;
    std::uint64_t q = 0;
};

// Materializes q virtual prompts per model, sorts them, and returns element
// ceil(total/2).
double oracle_median(std::span<const OracleModelEntry> table);

} // namespace fleetmeter
