#include "greenfront/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "greenfront/rng.hpp"
#include "greenfront/tracking.hpp"

namespace greenfront {

namespace {

constexpr std::size_t kMaxChoiceEnumeration = 64;
constexpr std::size_t kRestarts = 16;
constexpr double kInitialStep = 0.25;
constexpr double kMinStep = 1.0 / 128.0;

std::vector<Direction> directions_of(const std::vector<ObjectiveSpec>& specs) {
    std::vector<Direction> dirs;
    dirs.reserve(specs.size());
    for (const auto& spec : specs) dirs.push_back(spec.direction);
    return dirs;
}

// All choice-value combinations when the product is small, else a seeded
// uniform sample of kMaxChoiceEnumeration combinations.
std::vector<std::map<std::string, ParamValue>> choice_combinations(
    const SearchSpace& space, std::uint64_t seed) {
    const auto choice_specs = space.choice_specs();
    if (choice_specs.empty()) return {{}};

    std::uint64_t product = 1;
    bool overflow = false;
    for (const auto* spec : choice_specs) {
        product *= spec->values.size();
        if (product > kMaxChoiceEnumeration) {
            overflow = true;
            break;
        }
    }

    std::vector<std::map<std::string, ParamValue>> combos;
    if (!overflow) {
        combos.resize(1);
        for (const auto* spec : choice_specs) {
            std::vector<std::map<std::string, ParamValue>> expanded;
            expanded.reserve(combos.size() * spec->values.size());
            for (const auto& base : combos) {
                for (const auto& value : spec->values) {
                    auto combo = base;
                    combo[spec->name] = value;
                    expanded.push_back(std::move(combo));
                }
            }
            combos = std::move(expanded);
        }
        return combos;
    }

    Rng rng(seed);
    combos.reserve(kMaxChoiceEnumeration);
    for (std::size_t i = 0; i < kMaxChoiceEnumeration; ++i) {
        std::map<std::string, ParamValue> combo;
        for (const auto* spec : choice_specs) {
            combo[spec->name] = spec->values[rng.uniform_index(spec->values.size())];
        }
        combos.push_back(std::move(combo));
    }
    return combos;
}

}  // namespace

OptimizerState make_optimizer_state(SearchSpace space,
                                    std::vector<ObjectiveSpec> objectives, int budget,
                                    int sobol_count, std::uint64_t seed) {
    if (sobol_count < 0 || budget < sobol_count) {
        throw std::invalid_argument("budget must satisfy T >= N0 >= 0");
    }
    OptimizerState state;
    state.sobol_stream = SobolSequence(space.range_dimension());
    state.space = std::move(space);
    state.objectives = std::move(objectives);
    state.budget = budget;
    state.sobol_count = sobol_count;
    state.rng_seed = seed;
    state.front.directions = directions_of(state.objectives);
    return state;
}

Configuration propose(const OptimizerState& state,
                      const std::vector<SurrogateModel>& surrogates) {
    if (surrogates.size() != state.objectives.size()) {
        throw std::invalid_argument("one surrogate per objective required");
    }

    // Normalized history of ok observations; the surrogates were fit on it.
    std::vector<ObjectiveVector> ok_values;
    std::vector<UnitPoint> ok_points;
    for (const auto& obs : state.observations) {
        if (obs.status != TrialStatus::Ok) continue;
        ok_values.push_back(obs.objectives);
        ok_points.push_back(encode(obs.config, state.space));
    }
    if (ok_values.empty()) {
        throw std::logic_error("propose requires at least one ok observation");
    }
    const auto normalized = normalize(ok_values, directions_of(state.objectives));
    const ReferencePoint ref =
        infer_reference_point(normalized.values, state.objectives, normalized.transform);

    // Posteriors of the incumbent front members, resampled inside the
    // acquisition to account for observation noise.
    std::vector<Direction> max_dirs(state.objectives.size(), Direction::Maximize);
    std::vector<std::size_t> front_indices;
    for (std::size_t i = 0; i < normalized.values.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < normalized.values.size(); ++j) {
            if (j != i && dominates(normalized.values[j], normalized.values[i], max_dirs)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) front_indices.push_back(i);
    }

    // The surrogates are fit on the normalized targets, so their posteriors
    // live in normalized improvement space already.
    auto posterior_at = [&](const UnitPoint& point) {
        PointPosterior posterior(state.objectives.size());
        for (std::size_t o = 0; o < state.objectives.size(); ++o) {
            const Posterior p = surrogates[o].posterior(point);
            posterior[o].mean = p.mean;
            posterior[o].variance = std::max(p.variance, 0.0);
        }
        return posterior;
    };

    std::vector<PointPosterior> front_posteriors;
    front_posteriors.reserve(front_indices.size());
    for (const std::size_t index : front_indices) {
        front_posteriors.push_back(posterior_at(ok_points[index]));
    }

    const std::uint64_t iteration_seed =
        state.rng_seed * 0x100000001b3ull + static_cast<std::uint64_t>(state.iteration);
    const EhviEvaluator evaluator(front_posteriors, ref, state.mc_samples,
                                  iteration_seed);
    auto acquisition = [&](const UnitPoint& point) {
        return evaluator.value(posterior_at(point));
    };

    const std::size_t d = state.space.range_dimension();

    // Restart points from the continuing Sobol' stream (cloned: propose does
    // not mutate the state).
    SobolSequence stream = state.sobol_stream;
    std::vector<UnitPoint> restarts;
    restarts.reserve(kRestarts);
    for (std::size_t r = 0; r < kRestarts; ++r) {
        restarts.push_back(UnitPoint{stream.next()});
    }

    const auto combos = choice_combinations(state.space, iteration_seed ^ 0x5bf03635ull);

    double best_value = -1.0;
    UnitPoint best_point{std::vector<double>(d, 0.5)};
    const std::map<std::string, ParamValue>* best_combo = &combos.front();

    for (const auto& combo : combos) {
        for (const auto& restart : restarts) {
            UnitPoint current = restart;
            double current_value = acquisition(current);
            double step = kInitialStep;
            while (step >= kMinStep) {
                // Compass search over coordinate neighbours.
                UnitPoint best_neighbor = current;
                double best_neighbor_value = current_value;
                for (std::size_t k = 0; k < d; ++k) {
                    for (const double sign : {+1.0, -1.0}) {
                        UnitPoint neighbor = current;
                        neighbor.coords[k] =
                            std::clamp(neighbor.coords[k] + sign * step, 0.0, 1.0);
                        if (neighbor.coords[k] == current.coords[k]) continue;
                        const double value = acquisition(neighbor);
                        if (value > best_neighbor_value) {
                            best_neighbor = neighbor;
                            best_neighbor_value = value;
                        }
                    }
                }
                if (best_neighbor_value > current_value) {
                    current = best_neighbor;
                    current_value = best_neighbor_value;
                } else {
                    step *= 0.5;
                }
                if (d == 0) break;
            }
            if (current_value > best_value) {
                best_value = current_value;
                best_point = current;
                best_combo = &combo;
            }
        }
    }

    return decode(best_point, *best_combo, state.space);
}

double bind_objective(const TrialResult& result, const ObjectiveSpec& spec) {
    if (spec.name == "efficiency") return result.efficiency;
    if (result.metadata.contains(spec.name) && result.metadata[spec.name].is_number()) {
        return result.metadata[spec.name].get<double>();
    }
    return result.performance;
}

namespace {

// Penalty for a failed/oom trial: efficiency objectives take 0; the rest
// take the user threshold when given, else the worst ok value seen so far,
// else 0.
ObjectiveVector penalty_objectives(const std::vector<ObjectiveSpec>& specs,
                                   const std::vector<Observation>& observations) {
    ObjectiveVector penalties(specs.size(), 0.0);
    for (std::size_t o = 0; o < specs.size(); ++o) {
        const auto& spec = specs[o];
        if (spec.name == "efficiency") {
            penalties[o] = 0.0;
            continue;
        }
        if (spec.threshold.has_value()) {
            penalties[o] = *spec.threshold;
            continue;
        }
        bool any = false;
        double worst = 0.0;
        for (const auto& obs : observations) {
            if (obs.status != TrialStatus::Ok) continue;
            const double value = obs.objectives[o];
            if (!any) {
                worst = value;
                any = true;
            } else if (spec.direction == Direction::Maximize) {
                worst = std::min(worst, value);
            } else {
                worst = std::max(worst, value);
            }
        }
        penalties[o] = any ? worst : 0.0;
    }
    return penalties;
}

std::optional<double> performance_penalty(const std::vector<ObjectiveSpec>& specs,
                                          const std::vector<Observation>& observations) {
    // The performance objective is by convention the first non-efficiency one.
    for (std::size_t o = 0; o < specs.size(); ++o) {
        if (specs[o].name == "efficiency") continue;
        const auto penalties = penalty_objectives(specs, observations);
        return penalties[o];
    }
    return std::nullopt;
}

}  // namespace

OptimizationResult run_optimization(const SearchSpace& space,
                                    const std::vector<ObjectiveSpec>& objectives,
                                    const std::string& adapter_cmd, int budget,
                                    int sobol_count, const OptimizeOptions& options) {
    {
        const auto violations = validate_space(space);
        if (!violations.empty()) {
            throw std::invalid_argument("invalid search space: " + violations.front());
        }
    }
    if (objectives.empty()) {
        throw std::invalid_argument("at least one objective required");
    }

    OptimizerState state = make_optimizer_state(space, objectives, budget, sobol_count,
                                                options.seed);
    state.mc_samples = options.mc_samples;
    Rng choice_rng(options.seed);

    OptimizationResult result;
    result.front.directions = directions_of(objectives);

    auto next_sobol_config = [&]() {
        UnitPoint point{state.sobol_stream.next()};
        std::map<std::string, ParamValue> choices;
        for (const HyperparameterSpec* spec : state.space.choice_specs()) {
            choices[spec->name] =
                spec->values[choice_rng.uniform_index(spec->values.size())];
        }
        return decode(point, choices, state.space);
    };

    for (int t = 1; t <= budget; ++t) {
        state.iteration = t;

        Configuration config;
        bool is_sobol_phase = t <= sobol_count;
        if (!is_sobol_phase) {
            std::vector<UnitPoint> ok_points;
            std::vector<ObjectiveVector> ok_values;
            for (const auto& obs : state.observations) {
                if (obs.status != TrialStatus::Ok) continue;
                ok_points.push_back(encode(obs.config, state.space));
                ok_values.push_back(obs.objectives);
            }
            if (ok_values.empty()) {
                // Nothing to model yet: keep space-filling.
                is_sobol_phase = true;
            } else {
                const auto normalized =
                    normalize(ok_values, directions_of(objectives));
                std::vector<SurrogateModel> surrogates;
                surrogates.reserve(objectives.size());
                for (std::size_t o = 0; o < objectives.size(); ++o) {
                    std::vector<double> targets;
                    targets.reserve(normalized.values.size());
                    for (const auto& v : normalized.values) targets.push_back(v[o]);
                    surrogates.push_back(fit(ok_points, targets));
                }
                config = propose(state, surrogates);
                state.sobol_stream.skip(kRestarts);  // propose consumed 16 restarts
            }
        }
        if (is_sobol_phase) {
            config = next_sobol_config();
        }

        TrialOptions trial_options;
        trial_options.skip_train = options.skip_train;
        trial_options.timeout_seconds = options.timeout_seconds;
        trial_options.dataset_ref = options.dataset_ref;
        trial_options.meter = options.meter;
        trial_options.penalty_performance =
            performance_penalty(objectives, state.observations);

        const TrialResult trial = run_trial(adapter_cmd, config, t, trial_options);
        if (trial.spawn_failure) {
            result.history = state.observations;
            result.front = state.front;
            result.aborted = true;
            result.error = trial.failure_reason;
            return result;
        }

        Observation obs;
        obs.trial_id = t;
        obs.config = config;
        obs.status = trial.status;
        obs.energy = trial.energy;
        obs.wall_seconds = trial.wall_seconds;
        if (trial.status == TrialStatus::Ok) {
            for (const auto& spec : objectives) {
                obs.objectives.push_back(bind_objective(trial, spec));
            }
        } else {
            obs.objectives = penalty_objectives(objectives, state.observations);
            if (trial.status == TrialStatus::Oom || trial.status == TrialStatus::Failed) {
                for (std::size_t o = 0; o < objectives.size(); ++o) {
                    if (objectives[o].name == "efficiency") obs.objectives[o] = 0.0;
                }
            }
        }

        state.observations.push_back(obs);
        if (obs.status == TrialStatus::Ok) {
            state.front = pareto_update(state.front, obs);
        }

        if (options.log_path.has_value()) {
            RunRecord record;
            record.trial_id = t;
            record.timestamp = utc_timestamp_now();
            record.config = config;
            for (const auto& spec : objectives) record.objective_names.push_back(spec.name);
            record.objective_values = obs.objectives;
            record.status = obs.status;
            record.energy = trial.energy;
            record.wall_seconds = trial.wall_seconds;
            record.phase = is_sobol_phase ? "sobol" : "mobo";
            record.metadata = trial.metadata;
            if (!trial.failure_reason.empty()) {
                record.metadata["failure_reason"] = trial.failure_reason;
            }
            append_run(*options.log_path, record);
        }
        if (options.on_observation) options.on_observation(obs);
    }

    result.front = state.front;
    result.history = state.observations;
    return result;
}

}  // namespace greenfront
