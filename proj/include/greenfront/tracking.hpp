#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "greenfront/harness.hpp"
#include "greenfront/pareto.hpp"

namespace greenfront {

// One trial in the append-only run log; serializes to exactly one JSON line.
struct RunRecord {
    int trial_id = 0;
    double timestamp = 0.0;  // UTC seconds, millisecond precision
    Configuration config;
    std::vector<std::string> objective_names;
    ObjectiveVector objective_values;
    TrialStatus status = TrialStatus::Ok;
    EnergyReport energy;
    double wall_seconds = 0.0;
    std::string phase = "sobol";  // sobol | mobo
    nlohmann::json metadata = nlohmann::json::object();

    nlohmann::ordered_json to_json() const;
    static RunRecord from_json(const nlohmann::json& j);
};

double utc_timestamp_now();

// Appends one record as a single line; prior content untouched.
void append_run(const std::string& log_path, const RunRecord& record);

// Loads all records; a torn (unparsable) final line is discarded, anything
// malformed earlier is an error.
std::vector<RunRecord> load_runs(const std::string& log_path);

struct ReportTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

// Pareto-optimal ok records, sorted descending by the first objective.
// Columns: objectives, then hyperparameters (those that vary across records,
// or all of them when nothing varies); `hyperparameter_columns` overrides
// the selection.
ReportTable frontier_report(const std::vector<RunRecord>& records,
                            const std::vector<ObjectiveSpec>& objectives,
                            const std::vector<std::string>& hyperparameter_columns = {});

// Product-moment correlation; nullopt when either series is constant.
std::optional<double> pearson(const std::vector<double>& xs,
                              const std::vector<double>& ys);

struct CorrelationEntry {
    std::string first;
    std::string second;
    std::optional<double> r;  // nullopt: undefined (constant series)
};

// One pearson value per requested metric pair over ok records. Metric names
// resolve against objectives, wall_seconds, energy fields, per-component
// joules, configuration parameters and numeric metadata; unknown names throw.
std::vector<CorrelationEntry> correlation_report(
    const std::vector<RunRecord>& records,
    const std::vector<std::pair<std::string, std::string>>& metric_pairs);

// RFC-4180-style CSV; numeric values keep >= 15 significant digits.
void export_csv(const std::vector<RunRecord>& records,
                const std::vector<std::string>& columns, const std::string& path);

}  // namespace greenfront
