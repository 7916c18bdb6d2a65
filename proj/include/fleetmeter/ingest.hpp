#pragma once

#include "fleetmeter/types.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fleetmeter {

struct Diagnostic {
    std::string file;
    std::int64_t line = 0; // 0 when not line-addressable (JSON, joins)
    std::string message;

    std::string format() const;
};

template <typename T>
struct ParseOutcome {
    std::vector<T> records;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return diagnostics.empty(); }
};

// Scanning parsers: collect every malformed line instead of stopping at the
// first, so `validate` can report a complete picture. Records appear in file
// line order.
ParseOutcome<PowerSample> scan_power_samples(std::string_view text);
ParseOutcome<AllocationRecord> scan_allocations(std::string_view text);
ParseOutcome<PromptTally> scan_prompt_tallies(std::string_view text);
ParseOutcome<MachineSpec> scan_machines(std::string_view text);

struct FactorScan {
    FactorTable factors;
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return diagnostics.empty(); }
};
FactorScan scan_factors(std::string_view json_text);

// Throwing variants: raise Error on the first diagnostic.
std::vector<PowerSample> parse_power_samples(std::string_view text);
std::vector<AllocationRecord> parse_allocations(std::string_view text);
std::vector<PromptTally> parse_prompt_tallies(std::string_view text);
std::vector<MachineSpec> parse_machines(std::string_view text);
FactorTable load_factors(std::string_view json_text);

// Canonical serialization. Round-trips through the parsers field-for-field,
// including double bit patterns.
std::string to_csv(const std::vector<PowerSample>& records);
std::string to_csv(const std::vector<AllocationRecord>& records);
std::string to_csv(const std::vector<PromptTally>& records);
std::string to_csv(const std::vector<MachineSpec>& records);
std::string to_json(const FactorTable& factors);

// Fixed bundle file names.
inline constexpr const char* kPowerCsv = "power.csv";
inline constexpr const char* kAllocCsv = "alloc.csv";
inline constexpr const char* kPromptsCsv = "prompts.csv";
inline constexpr const char* kMachinesCsv = "machines.csv";
inline constexpr const char* kFactorsJson = "factors.json";

/// All parsed inputs for one run. Immutable after construction; safe to share
/// across concurrent readers.
struct Bundle {
    std::vector<PowerSample> power;
    std::vector<AllocationRecord> allocations;
    std::vector<PromptTally> tallies;
    std::vector<MachineSpec> machines;
    FactorTable factors;
};

// Loads the five fixed-name files from `dir`. Throws on the first failure.
Bundle load_bundle(const std::filesystem::path& dir);

// Cross-file join checks on an already-parsed bundle: every allocation has a
// power sample and a machine spec, every machine campus has a PUE for the
// years it needs, every hardware class has an embodied rate, every tally's
// model has allocations in its datacenter on its day.
std::vector<Diagnostic> cross_validate(const Bundle& bundle);

// Full file-level validation for the `validate` subcommand: parse all five
// files collecting every diagnostic, then cross-validate if parsing succeeded.
std::vector<Diagnostic> validate_bundle_dir(const std::filesystem::path& dir);

} // namespace fleetmeter
