#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "greenfront/ehvi.hpp"
#include "greenfront/harness.hpp"
#include "greenfront/pareto.hpp"
#include "greenfront/search_space.hpp"
#include "greenfront/sobol.hpp"
#include "greenfront/surrogate.hpp"

namespace greenfront {

struct OptimizerState {
    SearchSpace space;
    std::vector<ObjectiveSpec> objectives;
    std::vector<Observation> observations;
    ParetoFront front;
    int budget = 0;        // T
    int sobol_count = 0;   // N0
    int iteration = 0;     // t, trials completed so far
    std::uint64_t rng_seed = 0;
    SobolSequence sobol_stream{0};
    std::size_t mc_samples = 128;
};

// Initial state with an empty history and a Sobol' stream sized to the
// space's range dimension.
OptimizerState make_optimizer_state(SearchSpace space,
                                    std::vector<ObjectiveSpec> objectives, int budget,
                                    int sobol_count, std::uint64_t seed);

// Acquisition argmax: enumerates choice combinations (exactly when their
// product is <= 64, else 64 seeded samples) and runs a 16-restart pattern
// search over the unit cube per combination, restart points taken from the
// continuing Sobol' stream. Pure: the caller advances the state's streams.
// Requires surrogates fitted per objective on the normalized ok history.
Configuration propose(const OptimizerState& state,
                      const std::vector<SurrogateModel>& surrogates);

struct OptimizeOptions {
    std::uint64_t seed = 0;
    bool skip_train = false;
    double timeout_seconds = 3600.0;
    std::string dataset_ref;
    MeterConfig meter;
    std::size_t mc_samples = 128;
    std::optional<std::string> log_path;
    // Called after each completed trial (e.g. for progress output).
    std::function<void(const Observation&)> on_observation;
};

struct OptimizationResult {
    ParetoFront front;
    std::vector<Observation> history;
    bool aborted = false;     // adapter could not be launched
    std::string error;
};

// The outer optimisation loop: N0 Sobol' trials, then surrogate-guided
// proposals until T trials have run. Every trial goes through run_trial and,
// when a log path is set, is appended to the run log. Failed/oom trials
// receive penalty objectives and never join the front.
OptimizationResult run_optimization(const SearchSpace& space,
                                    const std::vector<ObjectiveSpec>& objectives,
                                    const std::string& adapter_cmd, int budget,
                                    int sobol_count, const OptimizeOptions& options);

// Objective value of a finished trial: "efficiency" binds to samples/J,
// names present in the adapter metadata bind to that number, anything else
// binds to the adapter's performance value.
double bind_objective(const TrialResult& result, const ObjectiveSpec& spec);

}  // namespace greenfront
