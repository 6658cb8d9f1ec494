#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "greenfront/harness.hpp"
#include "greenfront/meter.hpp"
#include "greenfront/optimizer.hpp"
#include "greenfront/pareto.hpp"
#include "greenfront/search_space.hpp"
#include "greenfront/tracking.hpp"

namespace {

using namespace greenfront;

// "name:direction[:threshold]"
ObjectiveSpec parse_objective(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() < 2 || parts.size() > 3 || parts[0].empty()) {
        throw CLI::ValidationError(
            "--objective", "expected name:direction[:threshold], got '" + text + "'");
    }
    ObjectiveSpec spec;
    spec.name = parts[0];
    try {
        spec.direction = direction_from_string(parts[1]);
    } catch (const std::invalid_argument& e) {
        throw CLI::ValidationError("--objective", e.what());
    }
    if (parts.size() == 3) {
        try {
            spec.threshold = std::stod(parts[2]);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--objective",
                                       "threshold must be a number, got '" + parts[2] + "'");
        }
    }
    return spec;
}

struct MeterFlags {
    double pue = -1.0;
    double intensity = -1.0;
    double interval = -1.0;
    std::string config_path;
};

void add_meter_flags(CLI::App* cmd, MeterFlags* flags) {
    cmd->add_option("--meter-config", flags->config_path,
                    "JSON file with meter settings and the component inventory");
    cmd->add_option("--pue", flags->pue, "power usage effectiveness (>= 1)");
    cmd->add_option("--carbon-intensity", flags->intensity, "kgCO2eq per kWh");
    cmd->add_option("--interval", flags->interval, "meter sampling interval in seconds");
}

// Precedence: config file < command-line flag < environment variable.
MeterConfig resolve_meter_config(const MeterFlags& flags) {
    MeterConfig config;
    if (!flags.config_path.empty()) {
        std::ifstream in(flags.config_path);
        if (!in) {
            throw std::runtime_error("cannot open meter config '" + flags.config_path + "'");
        }
        nlohmann::json doc = nlohmann::json::parse(in);
        config.interval_seconds = doc.value("interval_seconds", config.interval_seconds);
        config.pue = doc.value("pue", config.pue);
        config.carbon_intensity = doc.value("carbon_intensity", config.carbon_intensity);
        config.cpu_tdp_watts = doc.value("cpu_tdp_watts", config.cpu_tdp_watts);
        config.cpu_core_fraction = doc.value("cpu_core_fraction", config.cpu_core_fraction);
        config.ram_gb = doc.value("ram_gb", config.ram_gb);
        config.gpu_present = doc.value("gpu_present", config.gpu_present);
        config.gpu_tdp_watts = doc.value("gpu_tdp_watts", config.gpu_tdp_watts);
    }
    if (flags.pue >= 0.0) config.pue = flags.pue;
    if (flags.intensity >= 0.0) config.carbon_intensity = flags.intensity;
    if (flags.interval > 0.0) config.interval_seconds = flags.interval;
    if (const char* env = std::getenv("GREENFRONT_PUE")) config.pue = std::stod(env);
    if (const char* env = std::getenv("GREENFRONT_CARBON_INTENSITY")) {
        config.carbon_intensity = std::stod(env);
    }
    return config;
}

void print_table(const ReportTable& table, std::ostream& out) {
    std::vector<std::size_t> widths(table.columns.size());
    auto cell_text = [](const std::string& cell) {
        // Shorten noisy doubles for display.
        try {
            std::size_t consumed = 0;
            const double value = std::stod(cell, &consumed);
            if (consumed == cell.size() && cell.find_first_not_of("0123456789-") !=
                                               std::string::npos) {
                std::ostringstream oss;
                oss << std::setprecision(6) << value;
                return oss.str();
            }
        } catch (const std::exception&) {
        }
        return cell;
    };
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : table.rows) {
        std::vector<std::string> cells;
        for (const auto& cell : row) cells.push_back(cell_text(cell));
        rows.push_back(std::move(cells));
    }
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        widths[c] = table.columns[c].size();
        for (const auto& row : rows) widths[c] = std::max(widths[c], row[c].size());
    }
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out << (c > 0 ? "  " : "") << std::left << std::setw(static_cast<int>(widths[c]))
            << table.columns[c];
    }
    out << "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out << (c > 0 ? "  " : "") << std::string(widths[c], '-');
    }
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c > 0 ? "  " : "") << std::left
                << std::setw(static_cast<int>(widths[c])) << row[c];
        }
        out << "\n";
    }
}

void print_energy_report(const EnergyReport& report, std::ostream& out) {
    out << "energy report\n";
    for (const auto& [component, joules] : report.joules_by_component) {
        out << "  " << component << ": " << joules << " J\n";
    }
    out << "  total: " << report.total_joules << " J\n"
        << "  PUE-adjusted: " << report.pue_adjusted_joules << " J\n"
        << "  electricity: " << report.kwh << " kWh\n"
        << "  emissions: " << report.kg_co2eq << " kgCO2eq\n"
        << "  duration: " << report.duration_seconds << " s ("
        << report.sample_count << " samples)\n";
    for (const auto& warning : report.warnings) {
        out << "  warning: " << warning << "\n";
    }
}

int run_tune(const std::string& space_path, const std::string& adapter_cmd,
             std::vector<std::string> objective_args, int sobol_points, int iterations,
             std::uint64_t seed, const std::string& out_path, const MeterFlags& meter_flags,
             bool skip_train, double timeout, const std::string& dataset_ref) {
    const SearchSpace space = load_search_space(space_path);

    std::vector<ObjectiveSpec> objectives;
    for (const auto& arg : objective_args) objectives.push_back(parse_objective(arg));

    if (sobol_points < 0) {
        sobol_points = std::max<int>(5, 2 * static_cast<int>(space.dimensionality()));
    }
    if (iterations < sobol_points) {
        std::cerr << "error: --iterations must be >= --sobol\n";
        return 2;
    }

    OptimizeOptions options;
    options.seed = seed;
    options.skip_train = skip_train;
    options.timeout_seconds = timeout;
    options.dataset_ref = dataset_ref;
    options.meter = resolve_meter_config(meter_flags);
    options.log_path = out_path;
    options.on_observation = [&](const Observation& obs) {
        std::cerr << "trial " << obs.trial_id << "/" << iterations << " ["
                  << to_string(obs.status) << "]";
        for (std::size_t o = 0; o < objectives.size(); ++o) {
            std::cerr << " " << objectives[o].name << "=" << obs.objectives[o];
        }
        std::cerr << "\n";
    };

    const OptimizationResult result = run_optimization(
        space, objectives, adapter_cmd, iterations, sobol_points, options);
    if (result.aborted) {
        std::cerr << "error: " << result.error << "\n";
        return 1;
    }

    const std::vector<RunRecord> records = load_runs(out_path);
    std::vector<std::string> param_columns;
    for (const auto& spec : space.specs) {
        if (spec.kind != SpecKind::Fixed) param_columns.push_back(spec.name);
    }
    print_table(frontier_report(records, objectives, param_columns), std::cout);
    return 0;
}

int run_measure(const std::string& adapter_cmd, const std::string& config_path,
                const MeterFlags& meter_flags, bool skip_train, double timeout,
                const std::string& dataset_ref) {
    Configuration config;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            throw std::runtime_error("cannot open config '" + config_path + "'");
        }
        config = config_from_json(nlohmann::json::parse(in));
    }

    TrialOptions options;
    options.skip_train = skip_train;
    options.timeout_seconds = timeout;
    options.dataset_ref = dataset_ref;
    options.meter = resolve_meter_config(meter_flags);

    const TrialResult result = run_trial(adapter_cmd, config, 1, options);
    if (result.status != TrialStatus::Ok) {
        std::cerr << "error: trial " << to_string(result.status) << ": "
                  << result.failure_reason << "\n";
        return 1;
    }
    std::cout << "performance: " << result.performance << "\n"
              << "samples: " << result.samples << "\n"
              << "efficiency: " << result.efficiency << " samples/J\n";
    print_energy_report(result.energy, std::cout);
    if (!result.metadata.empty()) {
        std::cout << "metadata: " << result.metadata.dump() << "\n";
    }
    return 0;
}

int run_report(const std::string& log_path, std::vector<std::string> objective_args,
               const std::vector<std::string>& correlate_args,
               const std::string& export_path, const std::string& columns_arg) {
    const std::vector<RunRecord> records = load_runs(log_path);

    std::vector<ObjectiveSpec> objectives;
    for (const auto& arg : objective_args) objectives.push_back(parse_objective(arg));
    if (objectives.empty()) {
        if (!records.empty()) {
            for (const auto& name : records.front().objective_names) {
                objectives.push_back(ObjectiveSpec{name, Direction::Maximize, {}});
            }
        } else {
            objectives.push_back(ObjectiveSpec{"performance", Direction::Maximize, {}});
            objectives.push_back(ObjectiveSpec{"efficiency", Direction::Maximize, {}});
        }
    }

    print_table(frontier_report(records, objectives), std::cout);

    if (!correlate_args.empty()) {
        std::vector<std::pair<std::string, std::string>> pairs;
        for (const auto& arg : correlate_args) {
            const auto comma = arg.find(',');
            if (comma == std::string::npos) {
                std::cerr << "error: --correlate expects 'metric_a,metric_b'\n";
                return 2;
            }
            pairs.emplace_back(arg.substr(0, comma), arg.substr(comma + 1));
        }
        std::cout << "\ncorrelations\n";
        for (const auto& entry : correlation_report(records, pairs)) {
            std::cout << "  " << entry.first << " ~ " << entry.second << ": ";
            if (entry.r.has_value()) {
                std::cout << *entry.r << "\n";
            } else {
                std::cout << "undefined (constant series)\n";
            }
        }
    }

    if (!export_path.empty()) {
        std::vector<std::string> columns;
        std::stringstream ss(columns_arg);
        std::string column;
        while (std::getline(ss, column, ',')) {
            if (!column.empty()) columns.push_back(column);
        }
        if (columns.empty()) {
            columns = {"trial_id", "status", "phase"};
            if (!records.empty()) {
                for (const auto& name : records.front().objective_names) {
                    columns.push_back(name);
                }
                for (const auto& [name, value] : records.front().config.assignments) {
                    columns.push_back(name);
                }
            }
            columns.push_back("total_joules");
            columns.push_back("wall_seconds");
        }
        export_csv(records, columns, export_path);
        std::cerr << "wrote " << records.size() << " rows to " << export_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pareto-frontier hyperparameter tuning for performance and energy efficiency"};
    app.require_subcommand(1);

    // tune
    auto* tune = app.add_subcommand("tune", "run the multi-objective optimisation loop");
    std::string space_path, adapter_cmd, out_path = "runs.jsonl", dataset_ref;
    std::vector<std::string> objective_args;
    int sobol_points = -1, iterations = 0;
    std::uint64_t seed = 0;
    bool skip_train = false;
    double timeout = 3600.0;
    MeterFlags tune_meter;
    tune->add_option("--space", space_path, "search-space JSON file")->required();
    tune->add_option("--adapter", adapter_cmd, "adapter command line")->required();
    tune->add_option("--objective", objective_args,
                     "objective as name:direction[:threshold]; repeatable")
        ->required();
    tune->add_option("--sobol", sobol_points,
                     "number of initial Sobol' trials (default max(5, 2*dimensionality))");
    tune->add_option("--iterations", iterations, "total trial budget")->required();
    tune->add_option("--seed", seed, "random seed");
    tune->add_option("--out", out_path, "run-log path (JSON lines)");
    tune->add_option("--timeout", timeout, "per-trial timeout in seconds");
    tune->add_option("--dataset", dataset_ref, "opaque dataset reference for the adapter");
    tune->add_flag("--skip-train", skip_train, "skip the training phase of every trial");
    add_meter_flags(tune, &tune_meter);

    // measure
    auto* measure = app.add_subcommand("measure", "run one metered trial");
    std::string measure_adapter, measure_config, measure_dataset;
    bool measure_skip_train = false;
    double measure_timeout = 3600.0;
    MeterFlags measure_meter;
    measure->add_option("--adapter", measure_adapter, "adapter command line")->required();
    measure->add_option("--config", measure_config, "configuration JSON file");
    measure->add_option("--timeout", measure_timeout, "trial timeout in seconds");
    measure->add_option("--dataset", measure_dataset, "opaque dataset reference");
    measure->add_flag("--skip-train", measure_skip_train, "skip the training phase");
    add_meter_flags(measure, &measure_meter);

    // report
    auto* report = app.add_subcommand("report", "summarise an existing run log");
    std::string log_path, export_path, columns_arg;
    std::vector<std::string> report_objectives, correlate_args;
    report->add_option("--log", log_path, "run-log path")->required();
    report->add_option("--objective", report_objectives,
                       "objective as name:direction (defaults to the log's objectives, maximised)");
    report->add_option("--correlate", correlate_args,
                       "metric pair 'a,b' for a correlation table; repeatable");
    report->add_option("--export", export_path, "write records to this CSV file");
    report->add_option("--columns", columns_arg, "comma-separated CSV columns");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (tune->parsed()) {
            return run_tune(space_path, adapter_cmd, objective_args, sobol_points,
                            iterations, seed, out_path, tune_meter, skip_train, timeout,
                            dataset_ref);
        }
        if (measure->parsed()) {
            return run_measure(measure_adapter, measure_config, measure_meter,
                               measure_skip_train, measure_timeout, measure_dataset);
        }
        if (report->parsed()) {
            return run_report(log_path, report_objectives, correlate_args, export_path,
                              columns_arg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
