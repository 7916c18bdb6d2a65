// fleetmeter: per-prompt energy, emissions, and water accounting for a
// recorded or synthetic AI serving fleet.

#include "fleetmeter/aggregate.hpp"
#include "fleetmeter/boundary.hpp"
#include "fleetmeter/energy.hpp"
#include "fleetmeter/error.hpp"
#include "fleetmeter/footprint.hpp"
#include "fleetmeter/ingest.hpp"
#include "fleetmeter/pipeline.hpp"
#include "fleetmeter/report.hpp"
#include "fleetmeter/synthfleet.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace fm = fleetmeter;

namespace {

struct GlobalOptions {
    std::string format = "table";
};

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fm::Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void emit(const fm::ReportDocument& doc, const GlobalOptions& options) {
    std::cout << fm::render(doc, options.format);
}

nlohmann::json component_row(const char* name, double wh_per_prompt, double absolute_wh,
                             bool excluded) {
    nlohmann::json row;
    row["component"] = name;
    row["wh_per_prompt"] = wh_per_prompt;
    row["absolute_wh"] = absolute_wh;
    row["excluded"] = excluded;
    return row;
}

int run_validate(const std::string& data_dir, const GlobalOptions& options) {
    auto diagnostics = fm::validate_bundle_dir(data_dir);

    fm::ReportDocument doc;
    doc.command = "validate";
    doc.columns = {"file", "line", "message"};
    for (const auto& d : diagnostics) {
        nlohmann::json row;
        row["file"] = d.file;
        if (d.line > 0) row["line"] = d.line;
        row["message"] = d.message;
        doc.rows.push_back(std::move(row));
    }
    doc.summary["diagnostics"] = diagnostics.size();
    doc.summary["status"] = diagnostics.empty() ? "ok" : "invalid";
    emit(doc, options);
    return diagnostics.empty() ? 0 : 1;
}

void fill_energy_rows(fm::ReportDocument& doc, const fm::PerPromptEnergy& pp,
                      double absolute_scale) {
    const bool existing = pp.boundary == fm::Boundary::existing;
    doc.rows.push_back(component_row("active_accel", pp.active_accel_wh,
                                     pp.active_accel_wh * absolute_scale, false));
    doc.rows.push_back(component_row("active_host", pp.active_host_wh,
                                     pp.active_host_wh * absolute_scale, existing));
    doc.rows.push_back(
        component_row("idle", pp.idle_wh, pp.idle_wh * absolute_scale, existing));
    doc.rows.push_back(
        component_row("overhead", pp.overhead_wh, pp.overhead_wh * absolute_scale, existing));
    doc.rows.push_back(component_row("total", pp.headline_total_wh(),
                                     pp.headline_total_wh() * absolute_scale, false));
    for (auto& row : doc.rows) fm::attach_display(row, doc.columns);
}

int run_compute(const std::string& data_dir, const std::string& model, const std::string& from,
                const std::string& to, const std::string& boundary, double fraction,
                const GlobalOptions& options) {
    const fm::DateWindow window{fm::UtcDay::parse(from), fm::UtcDay::parse(to)};
    if (!window.valid()) throw fm::Error("empty window: --from is after --to");
    fm::Bundle bundle = fm::load_bundle(data_dir);

    fm::ReportDocument doc;
    doc.command = "compute";
    doc.window = window;
    doc.columns = {"component", "wh_per_prompt", "absolute_wh", "excluded"};
    doc.factors_used = fm::factor_summary(fm::factors_for_date(window.from, bundle.factors));
    doc.summary["model"] = model;
    doc.summary["boundary"] = boundary;

    if (boundary == "comprehensive") {
        auto result = fm::compute_comprehensive(bundle, model, window);
        fill_energy_rows(doc, result.per_prompt, static_cast<double>(result.q));
        doc.summary["q"] = result.q;
        doc.summary["machine_hours"] = result.components.machine_hours;
        doc.summary["fleet_pue"] = fm::fleet_average_pue(bundle, window);
    } else if (boundary == "existing") {
        auto pp = fm::compute_existing(bundle, model, window, fraction);
        fill_energy_rows(doc, pp, static_cast<double>(pp.q));
        doc.summary["q"] = pp.q;
        doc.summary["fraction"] = fraction;
        doc.summary["full_stack_wh_per_prompt"] = pp.total_wh;
    } else {
        throw CLI::ValidationError("--boundary must be comprehensive or existing");
    }
    emit(doc, options);
    return 0;
}

int run_compare(const std::string& data_dir, const std::string& from, const std::string& to,
                double fraction, const GlobalOptions& options) {
    const fm::DateWindow window{fm::UtcDay::parse(from), fm::UtcDay::parse(to)};
    if (!window.valid()) throw fm::Error("empty window: --from is after --to");
    fm::Bundle bundle = fm::load_bundle(data_dir);
    auto result = fm::compare_boundaries(bundle, window, fraction);

    fm::ReportDocument doc;
    doc.command = "compare-boundaries";
    doc.window = window;
    doc.columns = {"approach", "active_accel_wh", "active_host_wh", "idle_wh",
                   "overhead_wh", "total_wh", "q"};
    doc.factors_used = fm::factor_summary(fm::factors_for_date(window.from, bundle.factors));

    auto add_row = [&](const char* approach, const fm::PerPromptEnergy& pp) {
        nlohmann::json row;
        row["approach"] = approach;
        row["active_accel_wh"] = pp.active_accel_wh;
        row["active_host_wh"] = pp.active_host_wh;
        row["idle_wh"] = pp.idle_wh;
        row["overhead_wh"] = pp.overhead_wh;
        row["total_wh"] = pp.headline_total_wh();
        row["q"] = pp.q;
        nlohmann::json excluded = nlohmann::json::array();
        if (pp.boundary == fm::Boundary::existing) {
            excluded = {"active_host", "idle", "overhead"};
        }
        row["excluded"] = std::move(excluded);
        fm::attach_display(row, doc.columns);
        doc.rows.push_back(std::move(row));
    };
    add_row("existing", result.existing);
    add_row("comprehensive", result.comprehensive);

    doc.summary["comprehensive_over_existing"] = result.ratio;
    doc.summary["accelerator_scaling_factor"] = result.scaling_factor;
    doc.summary["fraction"] = fraction;
    doc.summary["fleet_pue"] = fm::fleet_average_pue(bundle, window);
    emit(doc, options);
    return 0;
}

nlohmann::json median_row(const fm::MedianReport& report) {
    nlohmann::json row;
    row["median_model"] = report.median_model_id;
    row["total_wh"] = report.energy.total_wh;
    row["active_accel_wh"] = report.energy.active_accel_wh;
    row["active_host_wh"] = report.energy.active_host_wh;
    row["idle_wh"] = report.energy.idle_wh;
    row["overhead_wh"] = report.energy.overhead_wh;
    row["scope2_mb_g"] = report.emissions.scope2_mb_g;
    row["scope1_3_g"] = report.emissions.scope1_3_g;
    row["emissions_g"] = report.emissions.total_g;
    row["water_ml"] = report.water.consumption_ml;
    row["q_total"] = report.total_q;
    row["mean_wh"] = report.mean_energy_wh;
    return row;
}

int run_median(const std::string& data_dir, const std::string& month, bool daily,
               bool median_of_daily, const GlobalOptions& options) {
    const fm::YearMonth ym = fm::YearMonth::parse(month);
    const fm::DateWindow window = ym.window();
    fm::Bundle bundle = fm::load_bundle(data_dir);

    fm::ReportDocument doc;
    doc.command = "median";
    doc.window = window;
    doc.factors_used = fm::factor_summary(fm::factors_for_date(window.from, bundle.factors));
    doc.summary["month"] = ym.to_string();

    if (daily) {
        doc.columns = {"day", "median_model", "total_wh", "active_accel_wh", "active_host_wh",
                       "idle_wh", "overhead_wh", "scope2_mb_g", "scope1_3_g", "emissions_g",
                       "water_ml", "q_total", "mean_wh"};
        for (const auto& [day, report] : fm::daily_medians(bundle, window)) {
            nlohmann::json row = median_row(report);
            row["day"] = day.to_string();
            fm::attach_display(row, doc.columns);
            doc.rows.push_back(std::move(row));
        }
        if (doc.rows.empty()) {
            throw fm::Error("empty window: no prompts in " + ym.to_string());
        }
    } else {
        const auto mode =
            median_of_daily ? fm::MedianMode::median_of_daily : fm::MedianMode::pooled;
        fm::MedianReport report = fm::window_median(bundle, window, mode);
        doc.columns = {"median_model", "total_wh", "active_accel_wh", "active_host_wh",
                       "idle_wh", "overhead_wh", "scope2_mb_g", "scope1_3_g", "emissions_g",
                       "water_ml", "q_total", "mean_wh"};
        nlohmann::json row = median_row(report);
        fm::attach_display(row, doc.columns);
        doc.rows.push_back(std::move(row));
        doc.summary["aggregation"] = median_of_daily ? "median-of-daily" : "pooled";
    }
    emit(doc, options);
    return 0;
}

int run_trend(const std::string& data_dir, const std::string& from_month,
              const std::string& to_month, bool median_of_daily, const GlobalOptions& options) {
    const fm::YearMonth from = fm::YearMonth::parse(from_month);
    const fm::YearMonth to = fm::YearMonth::parse(to_month);
    fm::Bundle bundle = fm::load_bundle(data_dir);

    const auto mode = median_of_daily ? fm::MedianMode::median_of_daily : fm::MedianMode::pooled;
    auto series = fm::monthly_median_series(bundle, from, to, mode);
    fm::TrendReport trend = fm::trend_reductions(series);

    fm::ReportDocument doc;
    doc.command = "trend";
    doc.window = fm::DateWindow{from.window().from, to.window().to};
    doc.columns = {"month", "median_model", "total_wh", "scope2_mb_g", "scope1_3_g",
                   "emissions_g", "water_ml", "factor_year"};
    for (const auto& [ym, report] : series) {
        nlohmann::json row;
        row["month"] = ym.to_string();
        row["median_model"] = report.median_model_id;
        row["total_wh"] = report.energy.total_wh;
        row["scope2_mb_g"] = report.emissions.scope2_mb_g;
        row["scope1_3_g"] = report.emissions.scope1_3_g;
        row["emissions_g"] = report.emissions.total_g;
        row["water_ml"] = report.water.consumption_ml;
        row["factor_year"] =
            fm::factors_for_date(report.window.from, bundle.factors).year;
        fm::attach_display(row, doc.columns);
        doc.rows.push_back(std::move(row));
    }
    doc.summary["energy_reduction"] = trend.energy_reduction;
    doc.summary["scope2_reduction"] = trend.scope2_reduction;
    doc.summary["scope1_3_reduction"] = trend.scope1_3_reduction;
    doc.summary["total_emissions_reduction"] = trend.total_emissions_reduction;
    doc.summary["period_start"] = trend.period_start.to_string();
    doc.summary["period_end"] = trend.period_end.to_string();
    emit(doc, options);
    return 0;
}

int run_synth(const std::string& config_path, bool calibrate, std::int64_t seed_override,
              const std::string& out_dir, const GlobalOptions& options) {
    fm::ScenarioConfig config;
    if (calibrate) {
        config = fm::calibrate_table1();
    } else if (!config_path.empty()) {
        config = fm::ScenarioConfig::from_json(read_text_file(config_path));
    } else {
        throw CLI::ValidationError("synth requires --config or --calibrate-table1");
    }
    if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);

    fm::SyntheticBundle bundle = fm::generate_scenario(config);
    bundle.write_to(out_dir);

    fm::ReportDocument doc;
    doc.command = "synth";
    doc.columns = {"file", "bytes"};
    auto add = [&](const char* name, const std::string& content) {
        nlohmann::json row;
        row["file"] = name;
        row["bytes"] = content.size();
        doc.rows.push_back(std::move(row));
    };
    add(fm::kPowerCsv, bundle.power_csv);
    add(fm::kAllocCsv, bundle.alloc_csv);
    add(fm::kPromptsCsv, bundle.prompts_csv);
    add(fm::kMachinesCsv, bundle.machines_csv);
    add(fm::kFactorsJson, bundle.factors_json);
    doc.summary["out"] = out_dir;
    doc.summary["seed"] = config.seed;
    doc.summary["days"] = config.days;
    doc.summary["datacenters"] = config.datacenters;
    emit(doc, options);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fleetmeter: full-stack per-prompt energy, emissions, and water accounting"};
    app.require_subcommand(1);

    GlobalOptions options;
    app.add_option("--format", options.format, "Output format")
        ->check(CLI::IsMember({"table", "json", "csv"}))
        ->capture_default_str();

    std::string data_dir;
    std::string model = fm::kAllModels;
    std::string from, to, month, from_month, to_month;
    std::string boundary = "comprehensive";
    std::string config_path, out_dir;
    double fraction = 0.10;
    bool daily = false;
    bool median_of_daily = false;
    bool calibrate = false;
    std::int64_t seed_override = -1;

    auto* validate = app.add_subcommand("validate", "Parse and cross-check a telemetry bundle");
    validate->add_option("--data", data_dir, "Bundle directory")->required();

    auto* compute = app.add_subcommand("compute", "Energy decomposition for a model and window");
    compute->add_option("--data", data_dir, "Bundle directory")->required();
    compute->add_option("--model", model, "Model id or ALL")->capture_default_str();
    compute->add_option("--from", from, "Window start day (YYYY-MM-DD)")->required();
    compute->add_option("--to", to, "Window end day (YYYY-MM-DD)")->required();
    compute->add_option("--boundary", boundary, "Measurement boundary")
        ->check(CLI::IsMember({"comprehensive", "existing"}))
        ->capture_default_str();
    compute->add_option("--fraction", fraction, "Existing-approach subsample fraction")
        ->capture_default_str();

    auto* median = app.add_subcommand("median", "Median-prompt metrics for a month");
    median->add_option("--data", data_dir, "Bundle directory")->required();
    median->add_option("--month", month, "Month (YYYY-MM)")->required();
    median->add_flag("--daily", daily, "One row per day");
    median->add_flag("--median-of-daily", median_of_daily,
                     "Median of daily medians instead of pooled aggregation");

    auto* trend = app.add_subcommand("trend", "Monthly median series and reduction factors");
    trend->add_option("--data", data_dir, "Bundle directory")->required();
    trend->add_option("--from-month", from_month, "First month (YYYY-MM)")->required();
    trend->add_option("--to-month", to_month, "Last month (YYYY-MM)")->required();
    trend->add_flag("--median-of-daily", median_of_daily,
                    "Median of daily medians instead of pooled aggregation");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic telemetry bundle");
    synth->add_option("--config", config_path, "Scenario config JSON");
    synth->add_flag("--calibrate-table1", calibrate,
                    "Use the built-in reference-fleet calibration");
    synth->add_option("--seed", seed_override, "Override the scenario seed");
    synth->add_option("--out", out_dir, "Output directory")->required();

    auto* compare = app.add_subcommand("compare-boundaries",
                                       "Existing vs comprehensive boundary comparison");
    compare->add_option("--data", data_dir, "Bundle directory")->required();
    compare->add_option("--from", from, "Window start day (YYYY-MM-DD)")->required();
    compare->add_option("--to", to, "Window end day (YYYY-MM-DD)")->required();
    compare->add_option("--fraction", fraction, "Existing-approach subsample fraction")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2; // usage error
    }

    try {
        if (validate->parsed()) return run_validate(data_dir, options);
        if (compute->parsed()) {
            return run_compute(data_dir, model, from, to, boundary, fraction, options);
        }
        if (median->parsed()) {
            return run_median(data_dir, month, daily, median_of_daily, options);
        }
        if (trend->parsed()) {
            return run_trend(data_dir, from_month, to_month, median_of_daily, options);
        }
        if (synth->parsed()) {
            return run_synth(config_path, calibrate, seed_override, out_dir, options);
        }
        if (compare->parsed()) return run_compare(data_dir, from, to, fraction, options);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
