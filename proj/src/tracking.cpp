#include "greenfront/tracking.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fcntl.h>
#include <unistd.h>

#include "greenfront/kernels.hpp"

namespace greenfront {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

ordered_json energy_to_json(const EnergyReport& energy) {
    ordered_json j;
    j["joules_by_component"] = energy.joules_by_component;
    j["total_joules"] = energy.total_joules;
    j["pue_adjusted_joules"] = energy.pue_adjusted_joules;
    j["kwh"] = energy.kwh;
    j["kg_co2eq"] = energy.kg_co2eq;
    j["duration_seconds"] = energy.duration_seconds;
    j["sample_count"] = energy.sample_count;
    if (!energy.warnings.empty()) j["warnings"] = energy.warnings;
    return j;
}

EnergyReport energy_from_json(const json& j) {
    EnergyReport energy;
    if (j.contains("joules_by_component")) {
        energy.joules_by_component =
            j["joules_by_component"].get<std::map<std::string, double>>();
    }
    energy.total_joules = j.value("total_joules", 0.0);
    energy.pue_adjusted_joules = j.value("pue_adjusted_joules", 0.0);
    energy.kwh = j.value("kwh", 0.0);
    energy.kg_co2eq = j.value("kg_co2eq", 0.0);
    energy.duration_seconds = j.value("duration_seconds", 0.0);
    energy.sample_count = j.value("sample_count", std::size_t{0});
    if (j.contains("warnings")) {
        energy.warnings = j["warnings"].get<std::vector<std::string>>();
    }
    return energy;
}

}  // namespace

double utc_timestamp_now() {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    return static_cast<double>(ms) / 1000.0;
}

ordered_json RunRecord::to_json() const {
    ordered_json j;
    j["trial_id"] = trial_id;
    j["timestamp"] = timestamp;
    ordered_json config_json;
    for (const auto& [name, value] : config.assignments) {
        if (std::holds_alternative<bool>(value)) {
            config_json[name] = std::get<bool>(value);
        } else if (std::holds_alternative<std::int64_t>(value)) {
            config_json[name] = std::get<std::int64_t>(value);
        } else {
            config_json[name] = std::get<double>(value);
        }
    }
    j["config"] = std::move(config_json);
    ordered_json objectives;
    for (std::size_t i = 0; i < objective_names.size(); ++i) {
        objectives[objective_names[i]] = objective_values.at(i);
    }
    j["objectives"] = std::move(objectives);
    j["status"] = to_string(status);
    j["energy"] = energy_to_json(energy);
    j["wall_seconds"] = wall_seconds;
    j["phase"] = phase;
    j["metadata"] = metadata;
    return j;
}

RunRecord RunRecord::from_json(const json& j) {
    RunRecord record;
    record.trial_id = j.at("trial_id").get<int>();
    record.timestamp = j.at("timestamp").get<double>();
    record.config = config_from_json(j.at("config"));
    for (auto it = j.at("objectives").begin(); it != j.at("objectives").end(); ++it) {
        record.objective_names.push_back(it.key());
        record.objective_values.push_back(it.value().get<double>());
    }
    record.status = trial_status_from_string(j.at("status").get<std::string>());
    if (j.contains("energy")) record.energy = energy_from_json(j["energy"]);
    record.wall_seconds = j.value("wall_seconds", 0.0);
    record.phase = j.value("phase", std::string("sobol"));
    if (j.contains("metadata")) record.metadata = j["metadata"];
    return record;
}

void append_run(const std::string& log_path, const RunRecord& record) {
    const std::string line = record.to_json().dump() + "\n";
    const int fd = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd < 0) {
        throw std::runtime_error("cannot open run log '" + log_path + "' for append");
    }
    std::size_t written = 0;
    while (written < line.size()) {
        const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            ::close(fd);
            throw std::runtime_error("write to run log '" + log_path + "' failed");
        }
        written += static_cast<std::size_t>(n);
    }
    ::close(fd);
}

std::vector<RunRecord> load_runs(const std::string& log_path) {
    std::ifstream in(log_path);
    if (!in) {
        throw std::runtime_error("cannot open run log '" + log_path + "'");
    }
    std::vector<RunRecord> records;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded()) {
            if (in.peek() == EOF) break;  // torn final line: discard
            throw std::runtime_error("run log '" + log_path + "' corrupt at line " +
                                     std::to_string(line_number));
        }
        records.push_back(RunRecord::from_json(doc));
    }
    return records;
}

namespace {

// Metric resolution order: objective, engine field, energy field,
// per-component joules, config parameter, numeric metadata.
std::optional<double> resolve_metric(const RunRecord& record, const std::string& name) {
    for (std::size_t i = 0; i < record.objective_names.size(); ++i) {
        if (record.objective_names[i] == name) return record.objective_values[i];
    }
    if (name == "wall_seconds") return record.wall_seconds;
    if (name == "trial_id") return static_cast<double>(record.trial_id);
    if (name == "timestamp") return record.timestamp;
    if (name == "total_joules") return record.energy.total_joules;
    if (name == "pue_adjusted_joules") return record.energy.pue_adjusted_joules;
    if (name == "kwh") return record.energy.kwh;
    if (name == "kg_co2eq") return record.energy.kg_co2eq;
    if (name == "duration_seconds") return record.energy.duration_seconds;
    auto component = record.energy.joules_by_component.find(name);
    if (component != record.energy.joules_by_component.end()) return component->second;
    if (const ParamValue* value = record.config.find(name)) return as_double(*value);
    if (record.metadata.contains(name) && record.metadata[name].is_number()) {
        return record.metadata[name].get<double>();
    }
    return std::nullopt;
}

std::string value_as_cell(const RunRecord& record, const std::string& column) {
    if (column == "status") return to_string(record.status);
    if (column == "phase") return record.phase;
    if (column == "trial_id") return std::to_string(record.trial_id);
    if (const ParamValue* value = record.config.find(column)) return to_string(*value);
    if (auto metric = resolve_metric(record, column)) return format_double(*metric);
    if (record.metadata.contains(column)) {
        const json& v = record.metadata[column];
        return v.is_string() ? v.get<std::string>() : v.dump();
    }
    throw std::invalid_argument("unknown column '" + column + "'");
}

bool column_known(const RunRecord& record, const std::string& column) {
    if (column == "status" || column == "phase") return true;
    if (record.config.find(column) != nullptr) return true;
    if (resolve_metric(record, column).has_value()) return true;
    return record.metadata.contains(column);
}

}  // namespace

ReportTable frontier_report(const std::vector<RunRecord>& records,
                            const std::vector<ObjectiveSpec>& objectives,
                            const std::vector<std::string>& hyperparameter_columns) {
    std::vector<const RunRecord*> ok_records;
    for (const auto& record : records) {
        if (record.status == TrialStatus::Ok) ok_records.push_back(&record);
    }

    std::vector<Direction> dirs;
    dirs.reserve(objectives.size());
    for (const auto& spec : objectives) dirs.push_back(spec.direction);

    std::vector<ObjectiveVector> values;
    values.reserve(ok_records.size());
    for (const RunRecord* record : ok_records) {
        ObjectiveVector v;
        for (const auto& spec : objectives) {
            auto metric = resolve_metric(*record, spec.name);
            if (!metric) {
                throw std::invalid_argument("record " + std::to_string(record->trial_id) +
                                            " has no objective '" + spec.name + "'");
            }
            v.push_back(*metric);
        }
        values.push_back(std::move(v));
    }

    const auto mask = kernels::nondominated_mask(values, dirs);
    std::vector<std::size_t> optimal;
    for (std::size_t i = 0; i < ok_records.size(); ++i) {
        if (mask[i]) optimal.push_back(i);
    }
    std::stable_sort(optimal.begin(), optimal.end(),
                     [&](std::size_t a, std::size_t b) {
                         const double sign =
                             dirs.empty() || dirs[0] == Direction::Maximize ? 1.0 : -1.0;
                         return sign * values[a][0] > sign * values[b][0];
                     });

    // Hyperparameter columns: the caller's list, else those that vary.
    std::vector<std::string> param_columns = hyperparameter_columns;
    if (param_columns.empty() && !ok_records.empty()) {
        const auto& first_config = ok_records.front()->config.assignments;
        for (const auto& [name, first_value] : first_config) {
            bool varies = false;
            for (const RunRecord* record : ok_records) {
                const ParamValue* other = record->config.find(name);
                if (other == nullptr || !(*other == first_value)) {
                    varies = true;
                    break;
                }
            }
            if (varies) param_columns.push_back(name);
        }
        if (param_columns.empty()) {
            for (const auto& [name, value] : first_config) param_columns.push_back(name);
        }
    }

    ReportTable table;
    for (const auto& spec : objectives) table.columns.push_back(spec.name);
    for (const auto& name : param_columns) table.columns.push_back(name);
    for (const std::size_t index : optimal) {
        std::vector<std::string> row;
        for (std::size_t o = 0; o < objectives.size(); ++o) {
            row.push_back(format_double(values[index][o]));
        }
        for (const auto& name : param_columns) {
            const ParamValue* value = ok_records[index]->config.find(name);
            row.push_back(value != nullptr ? to_string(*value) : "");
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::optional<double> pearson(const std::vector<double>& xs,
                              const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw std::invalid_argument("pearson requires two equal-length series of >= 2 points");
    }
    const auto n = static_cast<double>(xs.size());
    const double mean_x = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double mean_y = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<CorrelationEntry> correlation_report(
    const std::vector<RunRecord>& records,
    const std::vector<std::pair<std::string, std::string>>& metric_pairs) {
    std::vector<const RunRecord*> ok_records;
    for (const auto& record : records) {
        if (record.status == TrialStatus::Ok) ok_records.push_back(&record);
    }

    std::vector<CorrelationEntry> entries;
    for (const auto& [first, second] : metric_pairs) {
        std::vector<double> xs, ys;
        for (const RunRecord* record : ok_records) {
            const auto x = resolve_metric(*record, first);
            const auto y = resolve_metric(*record, second);
            if (!x) throw std::invalid_argument("unknown metric '" + first + "'");
            if (!y) throw std::invalid_argument("unknown metric '" + second + "'");
            xs.push_back(*x);
            ys.push_back(*y);
        }
        CorrelationEntry entry{first, second, std::nullopt};
        if (xs.size() >= 2) entry.r = pearson(xs, ys);
        entries.push_back(std::move(entry));
    }
    return entries;
}

namespace {

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string quoted = "\"";
    for (const char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

}  // namespace

void export_csv(const std::vector<RunRecord>& records,
                const std::vector<std::string>& columns, const std::string& path) {
    for (const auto& record : records) {
        for (const auto& column : columns) {
            if (!column_known(record, column)) {
                throw std::invalid_argument("unknown column '" + column + "'");
            }
        }
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out << (i > 0 ? "," : "") << csv_quote(columns[i]);
    }
    out << "\n";
    for (const auto& record : records) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            out << (i > 0 ? "," : "") << csv_quote(value_as_cell(record, columns[i]));
        }
        out << "\n";
    }
    if (!out.flush()) {
        throw std::runtime_error("write to '" + path + "' failed");
    }
}

}  // namespace greenfront
