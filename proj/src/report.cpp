#include "fleetmeter/report.hpp"

#include "fleetmeter/csv.hpp"
#include "fleetmeter/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace fleetmeter {

double round_half_even(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    // rint honors the default to-nearest-even mode.
    return std::rint(value * scale) / scale;
}

std::string format_fixed(double value, int decimals) {
    const double rounded = round_half_even(value, decimals);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, rounded);
    // Avoid the "-0.00" artifact.
    if (buf[0] == '-' && std::strtod(buf, nullptr) == 0.0) {
        return std::string(buf + 1);
    }
    return buf;
}

void attach_display(nlohmann::json& row, const std::vector<std::string>& columns) {
    nlohmann::json display = nlohmann::json::object();
    for (const auto& col : columns) {
        auto it = row.find(col);
        if (it != row.end() && it->is_number_float()) {
            display[col] = format_fixed(it->get<double>(), 2);
        }
    }
    if (!display.empty()) row["display"] = std::move(display);
}

namespace {

nlohmann::json to_sorted_json(const ReportDocument& doc) {
    // nlohmann::json objects are std::map-backed, so keys serialize sorted.
    nlohmann::json j;
    j["schema_version"] = doc.schema_version;
    j["command"] = doc.command;
    if (doc.window) {
        j["window"] = {{"from", doc.window->from.to_string()},
                       {"to", doc.window->to.to_string()}};
    }
    j["columns"] = doc.columns;
    j["rows"] = doc.rows;
    j["factors_used"] = doc.factors_used;
    j["summary"] = doc.summary;
    return j;
}

std::string cell_text(const nlohmann::json& row, const std::string& col, bool rounded) {
    auto it = row.find(col);
    if (it == row.end() || it->is_null()) return "";
    if (it->is_string()) return it->get<std::string>();
    if (it->is_boolean()) return it->get<bool>() ? "true" : "false";
    if (it->is_number_float()) {
        return rounded ? format_fixed(it->get<double>(), 2)
                       : csv::format_double(it->get<double>());
    }
    return it->dump();
}

} // namespace

std::string to_json_text(const ReportDocument& doc) {
    return to_sorted_json(doc).dump(2) + "\n";
}

std::string to_table_text(const ReportDocument& doc) {
    std::vector<std::size_t> widths(doc.columns.size());
    std::vector<std::vector<std::string>> cells;
    for (std::size_t c = 0; c < doc.columns.size(); ++c) {
        widths[c] = doc.columns[c].size();
    }
    for (const auto& row : doc.rows) {
        std::vector<std::string> line;
        for (std::size_t c = 0; c < doc.columns.size(); ++c) {
            line.push_back(cell_text(row, doc.columns[c], /*rounded=*/true));
            widths[c] = std::max(widths[c], line.back().size());
        }
        cells.push_back(std::move(line));
    }

    std::string out;
    auto emit_row = [&](const std::vector<std::string>& line) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (c > 0) out += "  ";
            out += line[c];
            out.append(widths[c] - line[c].size(), ' ');
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
    };
    emit_row(doc.columns);
    for (const auto& line : cells) emit_row(line);

    if (!doc.summary.empty()) {
        out += '\n';
        for (const auto& [key, value] : doc.summary.items()) {
            out += key;
            out += ": ";
            if (value.is_number_float()) {
                out += format_fixed(value.get<double>(), 2);
            } else if (value.is_string()) {
                out += value.get<std::string>();
            } else {
                out += value.dump();
            }
            out += '\n';
        }
    }
    return out;
}

std::string to_csv_text(const ReportDocument& doc) {
    std::string out;
    for (std::size_t c = 0; c < doc.columns.size(); ++c) {
        if (c > 0) out += ',';
        out += doc.columns[c];
    }
    out += '\n';
    for (const auto& row : doc.rows) {
        for (std::size_t c = 0; c < doc.columns.size(); ++c) {
            if (c > 0) out += ',';
            out += cell_text(row, doc.columns[c], /*rounded=*/false);
        }
        out += '\n';
    }
    return out;
}

std::string render(const ReportDocument& doc, const std::string& format) {
    if (format == "json") return to_json_text(doc);
    if (format == "csv") return to_csv_text(doc);
    if (format == "table") return to_table_text(doc);
    throw Error("unknown format '" + format + "'");
}

nlohmann::json factor_summary(const FactorSet& factors) {
    nlohmann::json j;
    j["year"] = factors.year;
    j["ef_mb_g_per_kwh"] = factors.ef_mb_g_per_kwh;
    if (factors.ef_lb_g_per_kwh) j["ef_lb_g_per_kwh"] = *factors.ef_lb_g_per_kwh;
    j["wue_l_per_kwh"] = factors.wue_l_per_kwh;
    return j;
}

} // namespace fleetmeter
