#include "fleetmeter/ingest.hpp"

#include "fleetmeter/csv.hpp"
#include "fleetmeter/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace fleetmeter {

namespace {

using json = nlohmann::ordered_json;

constexpr std::string_view kPowerHeader = "machine_id,campus_id,hour,p_host_w,p_accel_w";
constexpr std::string_view kAllocHeader =
    "machine_id,model_id,job_id,hour,t_total_h,t_idle_h,p_idle_w";
constexpr std::string_view kPromptsHeader = "model_id,datacenter_id,day,q";
constexpr std::string_view kMachinesHeader = "machine_id,hardware_class,campus_id";

std::string line_ref(std::int64_t line) { return "line " + std::to_string(line); }

// Shared per-file scan loop: header check, then one callback per data line.
template <typename Fn>
void scan_csv(std::string_view text, std::string_view file, std::string_view header,
              std::vector<Diagnostic>& diags, Fn&& on_line) {
    bool header_seen = false;
    csv::for_each_line(text, [&](std::int64_t line_no, std::string_view line) {
        if (!header_seen) {
            header_seen = true;
            if (line != header) {
                diags.push_back({std::string(file), line_no,
                                 "bad header, expected '" + std::string(header) + "'"});
            }
            return;
        }
        on_line(line_no, line);
    });
    if (!header_seen) {
        diags.push_back({std::string(file), 0, "empty file, header line required"});
    }
}

bool check_field_count(const std::vector<std::string_view>& fields, std::size_t expected,
                       std::string_view file, std::int64_t line_no,
                       std::vector<Diagnostic>& diags) {
    if (fields.size() != expected) {
        diags.push_back({std::string(file), line_no,
                         "wrong column count, expected " + std::to_string(expected) + " got " +
                             std::to_string(fields.size())});
        return false;
    }
    return true;
}

bool check_id(std::string_view value, std::string_view field, std::string_view file,
              std::int64_t line_no, std::vector<Diagnostic>& diags) {
    if (value.empty()) {
        diags.push_back({std::string(file), line_no,
                         "empty identifier, " + line_ref(line_no) + ", field " +
                             std::string(field)});
        return false;
    }
    return true;
}

bool parse_field_double(std::string_view token, std::string_view field, std::string_view file,
                        std::int64_t line_no, std::vector<Diagnostic>& diags, double& out) {
    if (!csv::parse_double(token, out)) {
        diags.push_back({std::string(file), line_no,
                         "unparsable number, " + line_ref(line_no) + ", field " +
                             std::string(field)});
        return false;
    }
    return true;
}

template <typename K>
bool note_duplicate(std::map<K, std::int64_t>& seen, const K& key, std::string_view descr,
                    std::string_view file, std::int64_t line_no,
                    std::vector<Diagnostic>& diags) {
    auto [it, inserted] = seen.emplace(key, line_no);
    if (!inserted) {
        diags.push_back({std::string(file), line_no,
                         "duplicate " + std::string(descr) + ", " + line_ref(line_no) +
                             " (first at " + line_ref(it->second) + ")"});
        return true;
    }
    return false;
}

void require_ok(const std::vector<Diagnostic>& diags) {
    if (diags.empty()) return;
    std::string msg = diags.front().format();
    if (diags.size() > 1) {
        msg += " (+" + std::to_string(diags.size() - 1) + " more)";
    }
    throw Error(msg);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

} // namespace

std::string Diagnostic::format() const {
    if (line > 0) return file + ":" + std::to_string(line) + ": " + message;
    return file + ": " + message;
}

ParseOutcome<PowerSample> scan_power_samples(std::string_view text) {
    ParseOutcome<PowerSample> out;
    std::map<std::pair<std::string, std::int64_t>, std::int64_t> seen;
    scan_csv(text, kPowerCsv, kPowerHeader, out.diagnostics,
             [&](std::int64_t line_no, std::string_view line) {
                 auto f = csv::split_line(line);
                 if (!check_field_count(f, 5, kPowerCsv, line_no, out.diagnostics)) return;
                 PowerSample rec;
                 rec.machine_id = std::string(f[0]);
                 rec.campus_id = std::string(f[1]);
                 if (!check_id(f[0], "machine_id", kPowerCsv, line_no, out.diagnostics) ||
                     !check_id(f[1], "campus_id", kPowerCsv, line_no, out.diagnostics))
                     return;
                 try {
                     rec.hour = UtcHour::parse(f[2]);
                 } catch (const Error& e) {
                     out.diagnostics.push_back({kPowerCsv, line_no,
                                                std::string(e.what()) + ", " + line_ref(line_no) +
                                                    ", field hour"});
                     return;
                 }
                 if (!parse_field_double(f[3], "p_host", kPowerCsv, line_no, out.diagnostics,
                                         rec.p_host_w) ||
                     !parse_field_double(f[4], "p_accel", kPowerCsv, line_no, out.diagnostics,
                                         rec.p_accel_w))
                     return;
                 if (rec.p_host_w < 0) {
                     out.diagnostics.push_back({kPowerCsv, line_no,
                                                "negative power, " + line_ref(line_no) +
                                                    ", field p_host"});
                     return;
                 }
                 if (rec.p_accel_w < 0) {
                     out.diagnostics.push_back({kPowerCsv, line_no,
                                                "negative power, " + line_ref(line_no) +
                                                    ", field p_accel"});
                     return;
                 }
                 if (note_duplicate(seen, std::pair{rec.machine_id, rec.hour.count()},
                                    "(machine_id, hour) key", kPowerCsv, line_no,
                                    out.diagnostics))
                     return;
                 out.records.push_back(std::move(rec));
             });
    return out;
}

ParseOutcome<AllocationRecord> scan_allocations(std::string_view text) {
    ParseOutcome<AllocationRecord> out;
    scan_csv(text, kAllocCsv, kAllocHeader, out.diagnostics,
             [&](std::int64_t line_no, std::string_view line) {
                 auto f = csv::split_line(line);
                 if (!check_field_count(f, 7, kAllocCsv, line_no, out.diagnostics)) return;
                 AllocationRecord rec;
                 rec.machine_id = std::string(f[0]);
                 rec.model_id = std::string(f[1]);
                 rec.job_id = std::string(f[2]);
                 if (!check_id(f[0], "machine_id", kAllocCsv, line_no, out.diagnostics) ||
                     !check_id(f[1], "model_id", kAllocCsv, line_no, out.diagnostics) ||
                     !check_id(f[2], "job_id", kAllocCsv, line_no, out.diagnostics))
                     return;
                 try {
                     rec.hour = UtcHour::parse(f[3]);
                 } catch (const Error& e) {
                     out.diagnostics.push_back({kAllocCsv, line_no,
                                                std::string(e.what()) + ", " + line_ref(line_no) +
                                                    ", field hour"});
                     return;
                 }
                 if (!parse_field_double(f[4], "t_total_h", kAllocCsv, line_no, out.diagnostics,
                                         rec.t_total_h) ||
                     !parse_field_double(f[5], "t_idle_h", kAllocCsv, line_no, out.diagnostics,
                                         rec.t_idle_h) ||
                     !parse_field_double(f[6], "p_idle_w", kAllocCsv, line_no, out.diagnostics,
                                         rec.p_idle_w))
                     return;
                 if (rec.t_total_h <= 0.0 || rec.t_total_h > 1.0) {
                     out.diagnostics.push_back({kAllocCsv, line_no,
                                                "t_total out of (0,1], " + line_ref(line_no)});
                     return;
                 }
                 if (rec.t_idle_h < 0.0) {
                     out.diagnostics.push_back(
                         {kAllocCsv, line_no, "negative t_idle, " + line_ref(line_no)});
                     return;
                 }
                 if (rec.t_idle_h > rec.t_total_h) {
                     out.diagnostics.push_back({kAllocCsv, line_no,
                                                "t_idle exceeds t_total, " + line_ref(line_no)});
                     return;
                 }
                 if (rec.p_idle_w < 0.0) {
                     out.diagnostics.push_back({kAllocCsv, line_no,
                                                "negative power, " + line_ref(line_no) +
                                                    ", field p_idle"});
                     return;
                 }
                 out.records.push_back(std::move(rec));
             });
    return out;
}

ParseOutcome<PromptTally> scan_prompt_tallies(std::string_view text) {
    ParseOutcome<PromptTally> out;
    std::map<std::tuple<std::string, std::string, std::int64_t>, std::int64_t> seen;
    scan_csv(text, kPromptsCsv, kPromptsHeader, out.diagnostics,
             [&](std::int64_t line_no, std::string_view line) {
                 auto f = csv::split_line(line);
                 if (!check_field_count(f, 4, kPromptsCsv, line_no, out.diagnostics)) return;
                 PromptTally rec;
                 rec.model_id = std::string(f[0]);
                 rec.datacenter_id = std::string(f[1]);
                 if (!check_id(f[0], "model_id", kPromptsCsv, line_no, out.diagnostics) ||
                     !check_id(f[1], "datacenter_id", kPromptsCsv, line_no, out.diagnostics))
                     return;
                 try {
                     rec.day = UtcDay::parse(f[2]);
                 } catch (const Error& e) {
                     out.diagnostics.push_back({kPromptsCsv, line_no,
                                                std::string(e.what()) + ", " + line_ref(line_no) +
                                                    ", field day"});
                     return;
                 }
                 if (!csv::parse_u64(f[3], rec.q)) {
                     out.diagnostics.push_back({kPromptsCsv, line_no,
                                                "prompt count must be a non-negative integer, " +
                                                    line_ref(line_no) + ", field q"});
                     return;
                 }
                 if (note_duplicate(seen,
                                    std::tuple{rec.model_id, rec.datacenter_id, rec.day.count()},
                                    "(model_id, datacenter_id, day) key", kPromptsCsv, line_no,
                                    out.diagnostics))
                     return;
                 out.records.push_back(std::move(rec));
             });
    return out;
}

ParseOutcome<MachineSpec> scan_machines(std::string_view text) {
    ParseOutcome<MachineSpec> out;
    std::map<std::string, std::int64_t> seen;
    scan_csv(text, kMachinesCsv, kMachinesHeader, out.diagnostics,
             [&](std::int64_t line_no, std::string_view line) {
                 auto f = csv::split_line(line);
                 if (!check_field_count(f, 3, kMachinesCsv, line_no, out.diagnostics)) return;
                 MachineSpec rec{std::string(f[0]), std::string(f[1]), std::string(f[2])};
                 if (!check_id(f[0], "machine_id", kMachinesCsv, line_no, out.diagnostics) ||
                     !check_id(f[1], "hardware_class", kMachinesCsv, line_no, out.diagnostics) ||
                     !check_id(f[2], "campus_id", kMachinesCsv, line_no, out.diagnostics))
                     return;
                 if (note_duplicate(seen, rec.machine_id, "machine_id", kMachinesCsv, line_no,
                                    out.diagnostics))
                     return;
                 out.records.push_back(std::move(rec));
             });
    return out;
}

namespace {

bool get_number(const json& obj, const char* field, int year, bool required,
                std::vector<Diagnostic>& diags, double& out) {
    auto it = obj.find(field);
    if (it == obj.end()) {
        if (required) {
            diags.push_back({kFactorsJson, 0,
                             "missing required field '" + std::string(field) + "' for year " +
                                 std::to_string(year)});
        }
        return false;
    }
    if (!it->is_number()) {
        diags.push_back({kFactorsJson, 0,
                         "field '" + std::string(field) + "' must be a number, year " +
                             std::to_string(year)});
        return false;
    }
    out = it->get<double>();
    return true;
}

bool get_rate_map(const json& obj, const char* field, int year, std::vector<Diagnostic>& diags,
                  std::map<std::string, double>& out) {
    auto it = obj.find(field);
    if (it == obj.end()) {
        diags.push_back({kFactorsJson, 0,
                         "missing required field '" + std::string(field) + "' for year " +
                             std::to_string(year)});
        return false;
    }
    if (!it->is_object()) {
        diags.push_back({kFactorsJson, 0,
                         "field '" + std::string(field) + "' must be an object, year " +
                             std::to_string(year)});
        return false;
    }
    for (auto& [key, value] : it->items()) {
        if (!value.is_number()) {
            diags.push_back({kFactorsJson, 0,
                             "entry '" + key + "' in '" + field + "' must be a number, year " +
                                 std::to_string(year)});
            return false;
        }
        out[key] = value.get<double>();
    }
    return true;
}

} // namespace

FactorScan scan_factors(std::string_view json_text) {
    FactorScan out;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        out.diagnostics.push_back({kFactorsJson, 0, std::string("invalid JSON: ") + e.what()});
        return out;
    }
    if (!doc.is_object()) {
        out.diagnostics.push_back({kFactorsJson, 0, "top level must be an object keyed by year"});
        return out;
    }
    for (auto& [key, body] : doc.items()) {
        int year = 0;
        bool digits = key.size() == 4;
        for (char c : key) digits = digits && c >= '0' && c <= '9';
        if (digits) year = std::stoi(key);
        if (!digits || year < 1) {
            out.diagnostics.push_back(
                {kFactorsJson, 0, "unknown year format '" + key + "', expected YYYY"});
            continue;
        }
        if (!body.is_object()) {
            out.diagnostics.push_back(
                {kFactorsJson, 0, "year " + key + " entry must be an object"});
            continue;
        }
        FactorSet fs;
        fs.year = year;
        bool ok = get_rate_map(body, "pue_by_campus", year, out.diagnostics, fs.pue_by_campus);
        ok = get_number(body, "wue_l_per_kwh", year, true, out.diagnostics, fs.wue_l_per_kwh) && ok;
        ok = get_number(body, "ef_mb_g_per_kwh", year, true, out.diagnostics,
                        fs.ef_mb_g_per_kwh) &&
             ok;
        double lb = 0.0;
        if (get_number(body, "ef_lb_g_per_kwh", year, false, out.diagnostics, lb)) {
            fs.ef_lb_g_per_kwh = lb;
        }
        ok = get_rate_map(body, "embodied_g_per_machine_hour", year, out.diagnostics,
                          fs.embodied_g_per_machine_hour) &&
             ok;
        if (!ok) continue;
        for (const auto& [campus, pue] : fs.pue_by_campus) {
            if (pue < 1.0) {
                out.diagnostics.push_back({kFactorsJson, 0,
                                           "PUE below 1.0 for campus '" + campus + "', year " +
                                               key});
                ok = false;
            }
        }
        if (fs.wue_l_per_kwh < 0) {
            out.diagnostics.push_back({kFactorsJson, 0, "negative WUE, year " + key});
            ok = false;
        }
        if (fs.ef_mb_g_per_kwh < 0 || (fs.ef_lb_g_per_kwh && *fs.ef_lb_g_per_kwh < 0)) {
            out.diagnostics.push_back({kFactorsJson, 0, "negative emission factor, year " + key});
            ok = false;
        }
        for (const auto& [hw, rate] : fs.embodied_g_per_machine_hour) {
            if (rate < 0) {
                out.diagnostics.push_back({kFactorsJson, 0,
                                           "negative embodied rate for hardware class '" + hw +
                                               "', year " + key});
                ok = false;
            }
        }
        if (ok) out.factors.emplace(year, std::move(fs));
    }
    return out;
}

std::vector<PowerSample> parse_power_samples(std::string_view text) {
    auto out = scan_power_samples(text);
    require_ok(out.diagnostics);
    return std::move(out.records);
}

std::vector<AllocationRecord> parse_allocations(std::string_view text) {
    auto out = scan_allocations(text);
    require_ok(out.diagnostics);
    return std::move(out.records);
}

std::vector<PromptTally> parse_prompt_tallies(std::string_view text) {
    auto out = scan_prompt_tallies(text);
    require_ok(out.diagnostics);
    return std::move(out.records);
}

std::vector<MachineSpec> parse_machines(std::string_view text) {
    auto out = scan_machines(text);
    require_ok(out.diagnostics);
    return std::move(out.records);
}

FactorTable load_factors(std::string_view json_text) {
    auto out = scan_factors(json_text);
    require_ok(out.diagnostics);
    return std::move(out.factors);
}

std::string to_csv(const std::vector<PowerSample>& records) {
    std::string out{kPowerHeader};
    out += '\n';
    for (const auto& r : records) {
        out += r.machine_id + ',' + r.campus_id + ',' + r.hour.to_string() + ',' +
               csv::format_double(r.p_host_w) + ',' + csv::format_double(r.p_accel_w) + '\n';
    }
    return out;
}

std::string to_csv(const std::vector<AllocationRecord>& records) {
    std::string out{kAllocHeader};
    out += '\n';
    for (const auto& r : records) {
        out += r.machine_id + ',' + r.model_id + ',' + r.job_id + ',' + r.hour.to_string() + ',' +
               csv::format_double(r.t_total_h) + ',' + csv::format_double(r.t_idle_h) + ',' +
               csv::format_double(r.p_idle_w) + '\n';
    }
    return out;
}

std::string to_csv(const std::vector<PromptTally>& records) {
    std::string out{kPromptsHeader};
    out += '\n';
    for (const auto& r : records) {
        out += r.model_id + ',' + r.datacenter_id + ',' + r.day.to_string() + ',' +
               std::to_string(r.q) + '\n';
    }
    return out;
}

std::string to_csv(const std::vector<MachineSpec>& records) {
    std::string out{kMachinesHeader};
    out += '\n';
    for (const auto& r : records) {
        out += r.machine_id + ',' + r.hardware_class + ',' + r.campus_id + '\n';
    }
    return out;
}

std::string to_json(const FactorTable& factors) {
    json doc = json::object();
    for (const auto& [year, fs] : factors) {
        json body = json::object();
        json pue = json::object();
        for (const auto& [campus, value] : fs.pue_by_campus) pue[campus] = value;
        body["pue_by_campus"] = std::move(pue);
        body["wue_l_per_kwh"] = fs.wue_l_per_kwh;
        body["ef_mb_g_per_kwh"] = fs.ef_mb_g_per_kwh;
        if (fs.ef_lb_g_per_kwh) body["ef_lb_g_per_kwh"] = *fs.ef_lb_g_per_kwh;
        json embodied = json::object();
        for (const auto& [hw, rate] : fs.embodied_g_per_machine_hour) embodied[hw] = rate;
        body["embodied_g_per_machine_hour"] = std::move(embodied);
        doc[std::to_string(year)] = std::move(body);
    }
    return doc.dump(2) + "\n";
}

Bundle load_bundle(const std::filesystem::path& dir) {
    Bundle b;
    b.power = parse_power_samples(read_file(dir / kPowerCsv));
    b.allocations = parse_allocations(read_file(dir / kAllocCsv));
    b.tallies = parse_prompt_tallies(read_file(dir / kPromptsCsv));
    b.machines = parse_machines(read_file(dir / kMachinesCsv));
    b.factors = load_factors(read_file(dir / kFactorsJson));
    return b;
}

std::vector<Diagnostic> cross_validate(const Bundle& bundle) {
    std::vector<Diagnostic> diags;

    std::map<std::string, const MachineSpec*> machines;
    for (const auto& m : bundle.machines) machines.emplace(m.machine_id, &m);

    std::set<std::pair<std::string, std::int64_t>> sampled;
    for (const auto& s : bundle.power) sampled.emplace(s.machine_id, s.hour.count());

    // Campus tags on power samples must agree with machines.csv, which is the
    // authoritative join table.
    std::set<std::string> campus_mismatch_reported;
    for (const auto& s : bundle.power) {
        auto it = machines.find(s.machine_id);
        if (it != machines.end() && it->second->campus_id != s.campus_id &&
            campus_mismatch_reported.insert(s.machine_id).second) {
            diags.push_back({kPowerCsv, 0,
                             "campus mismatch for machine " + s.machine_id + ": power.csv says " +
                                 s.campus_id + ", machines.csv says " + it->second->campus_id});
        }
    }

    std::set<std::string> missing_machines;
    std::set<std::pair<std::string, int>> missing_pue;   // (campus, factor year)
    std::set<int> missing_years;
    std::set<std::pair<std::string, int>> missing_rates; // (hardware class, factor year)
    std::set<std::pair<std::string, std::string>> model_day_dc; // joins seen in allocations

    for (const auto& a : bundle.allocations) {
        if (!sampled.count({a.machine_id, a.hour.count()})) {
            diags.push_back({kAllocCsv, 0,
                             "allocation for machine " + a.machine_id + " at " +
                                 a.hour.to_string() + " has no power sample"});
        }
        auto it = machines.find(a.machine_id);
        if (it == machines.end()) {
            if (missing_machines.insert(a.machine_id).second) {
                diags.push_back({kAllocCsv, 0,
                                 "machine " + a.machine_id + " missing from machines.csv"});
            }
            continue;
        }
        const MachineSpec& spec = *it->second;
        int factor_year = a.hour.day().year() - 1;
        auto fy = bundle.factors.find(factor_year);
        if (fy == bundle.factors.end()) {
            if (missing_years.insert(factor_year).second) {
                diags.push_back({kFactorsJson, 0,
                                 "no factor set for year " + std::to_string(factor_year) +
                                     " (required for " + a.hour.day().to_string() + ")"});
            }
        } else {
            if (!fy->second.pue_by_campus.count(spec.campus_id) &&
                missing_pue.insert({spec.campus_id, factor_year}).second) {
                diags.push_back({kFactorsJson, 0,
                                 "no PUE for campus " + spec.campus_id + " in factor year " +
                                     std::to_string(factor_year)});
            }
            if (!fy->second.embodied_g_per_machine_hour.count(spec.hardware_class) &&
                missing_rates.insert({spec.hardware_class, factor_year}).second) {
                diags.push_back({kFactorsJson, 0,
                                 "no embodied rate for hardware class " + spec.hardware_class +
                                     " in factor year " + std::to_string(factor_year)});
            }
        }
        model_day_dc.insert(
            {a.model_id, spec.campus_id + "|" + a.hour.day().to_string()});
    }

    for (const auto& t : bundle.tallies) {
        if (t.q == 0) continue;
        if (!model_day_dc.count({t.model_id, t.datacenter_id + "|" + t.day.to_string()})) {
            diags.push_back({kPromptsCsv, 0,
                             "tally for model " + t.model_id + " in " + t.datacenter_id + " on " +
                                 t.day.to_string() + " has no matching allocations"});
        }
    }
    return diags;
}

std::vector<Diagnostic> validate_bundle_dir(const std::filesystem::path& dir) {
    std::vector<Diagnostic> diags;
    Bundle bundle;
    bool parses_ok = true;

    auto read_or_flag = [&](const char* name, std::string& out) {
        try {
            out = read_file(dir / name);
            return true;
        } catch (const Error& e) {
            diags.push_back({name, 0, e.what()});
            parses_ok = false;
            return false;
        }
    };

    std::string text;
    if (read_or_flag(kPowerCsv, text)) {
        auto r = scan_power_samples(text);
        parses_ok = parses_ok && r.ok();
        diags.insert(diags.end(), r.diagnostics.begin(), r.diagnostics.end());
        bundle.power = std::move(r.records);
    }
    if (read_or_flag(kAllocCsv, text)) {
        auto r = scan_allocations(text);
        parses_ok = parses_ok && r.ok();
        diags.insert(diags.end(), r.diagnostics.begin(), r.diagnostics.end());
        bundle.allocations = std::move(r.records);
    }
    if (read_or_flag(kPromptsCsv, text)) {
        auto r = scan_prompt_tallies(text);
        parses_ok = parses_ok && r.ok();
        diags.insert(diags.end(), r.diagnostics.begin(), r.diagnostics.end());
        bundle.tallies = std::move(r.records);
    }
    if (read_or_flag(kMachinesCsv, text)) {
        auto r = scan_machines(text);
        parses_ok = parses_ok && r.ok();
        diags.insert(diags.end(), r.diagnostics.begin(), r.diagnostics.end());
        bundle.machines = std::move(r.records);
    }
    if (read_or_flag(kFactorsJson, text)) {
        auto r = scan_factors(text);
        parses_ok = parses_ok && r.ok();
        diags.insert(diags.end(), r.diagnostics.begin(), r.diagnostics.end());
        bundle.factors = std::move(r.factors);
    }

    if (parses_ok) {
        auto joins = cross_validate(bundle);
        diags.insert(diags.end(), joins.begin(), joins.end());
    }
    return diags;
}

} // namespace fleetmeter
