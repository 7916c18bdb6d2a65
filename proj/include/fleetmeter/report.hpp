#pragma once

#include "fleetmeter/types.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace fleetmeter {

// Banker's rounding at `decimals` places, matching report table precision.
double round_half_even(double value, int decimals);

// Fixed-point display string, half-even rounded.
std::string format_fixed(double value, int decimals);

/// Machine-readable report envelope. Numeric row fields carry full precision;
/// each row's `display` object carries the separately rounded 2-decimal
/// strings used by the table renderer.
struct ReportDocument {
    std::string schema_version = "1";
    std::string command;
    std::optional<DateWindow> window;
    std::vector<std::string> columns; // render order for table/csv output
    nlohmann::json rows = nlohmann::json::array();
    nlohmann::json factors_used = nlohmann::json::object();
    nlohmann::json summary = nlohmann::json::object(); // command-specific scalars
};

// Adds row["display"][col] for every double-valued column.
void attach_display(nlohmann::json& row, const std::vector<std::string>& columns);

// Byte-stable: keys sorted, shortest round-trip number formatting.
std::string to_json_text(const ReportDocument& doc);

std::string to_table_text(const ReportDocument& doc);

// Plot-ready: full-precision values, one line per row.
std::string to_csv_text(const ReportDocument& doc);

std::string render(const ReportDocument& doc, const std::string& format); // table|json|csv

nlohmann::json factor_summary(const FactorSet& factors);

} // namespace fleetmeter
