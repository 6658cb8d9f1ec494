#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "greenfront/meter.hpp"
#include "greenfront/pareto.hpp"
#include "greenfront/search_space.hpp"

namespace greenfront {

struct TrialOptions {
    bool skip_train = false;
    double timeout_seconds = 3600.0;
    std::string dataset_ref;
    int early_stop_patience = 3;
    double early_stop_min_delta = 0.001;
    MeterConfig meter;
    // Penalty used for the performance value of failed/oom trials: the
    // objective threshold when the user gave one, else the worst value
    // observed so far (supplied by the optimiser loop).
    std::optional<double> penalty_performance;
};

struct TrialResult {
    TrialStatus status = TrialStatus::Failed;
    double performance = 0.0;
    std::int64_t samples = 0;      // inference items processed
    EnergyReport energy;           // evaluate phase only
    double efficiency = 0.0;       // samples per PUE-adjusted Joule
    std::optional<int> epochs_run;
    nlohmann::json metadata = nlohmann::json::object();
    double wall_seconds = 0.0;
    std::string failure_reason;    // empty when status == ok
    bool spawn_failure = false;    // process could not be launched at all
};

// Runs one trial against the adapter subprocess: optional metered train
// phase with early stopping, then a metered evaluate phase. The adapter
// speaks line-delimited JSON on stdin/stdout:
//   engine -> adapter: {"cmd":"train","trial_id":N,"config":{...},"dataset":"ref"}
//                      {"cmd":"stop"} | {"cmd":"evaluate","trial_id":N,"config":{...}}
//   adapter -> engine: {"event":"epoch","val_loss":x} | {"event":"trained"}
//                      {"event":"evaluated","performance":x,"samples":N,"metadata":{...}}
//                      {"event":"oom"} | {"event":"error","message":"..."}
// Unknown fields are ignored; unknown events fail the trial. Stderr passes
// through for user logs.
TrialResult run_trial(const std::string& adapter_cmd, const Configuration& config,
                      int trial_id, const TrialOptions& options);

// true iff the last `patience` consecutive absolute loss deltas are all
// below min_delta.
bool early_stop_check(const std::vector<double>& val_losses, int patience = 3,
                      double min_delta = 0.001);

// Units of inference needed to recover the optimisation energy spend.
// Throws when savings_per_unit_joules <= 0 (never breaks even).
std::int64_t breakeven(double optimization_energy_joules,
                       double savings_per_unit_joules);

nlohmann::json config_to_json(const Configuration& config);
Configuration config_from_json(const nlohmann::json& j);

}  // namespace greenfront
