#pragma once

#include <optional>
#include <string>
#include <vector>

#include "greenfront/meter.hpp"
#include "greenfront/search_space.hpp"

namespace greenfront {

enum class Direction { Maximize, Minimize };

Direction direction_from_string(const std::string& text);
std::string to_string(Direction direction);

struct ObjectiveSpec {
    std::string name;
    Direction direction = Direction::Maximize;
    std::optional<double> threshold;  // user-provided anti-ideal component
};

using ObjectiveVector = std::vector<double>;

enum class TrialStatus { Ok, Failed, Oom };

std::string to_string(TrialStatus status);
TrialStatus trial_status_from_string(const std::string& text);

// One completed trial as seen by the optimiser.
struct Observation {
    int trial_id = 0;
    Configuration config;
    ObjectiveVector objectives;
    TrialStatus status = TrialStatus::Ok;
    EnergyReport energy;
    double wall_seconds = 0.0;
};

// true iff `a` is at least as good as `b` in every objective and strictly
// better in at least one, direction-aware.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b,
               const std::vector<Direction>& dirs);

// Maintained nondominated set; members pairwise incomparable.
struct ParetoFront {
    std::vector<Observation> members;
    std::vector<Direction> directions;
};

// Returns the front with `obs` inserted: obs joins iff no member dominates
// it, and every member it dominates is removed. Non-ok observations are the
// caller's responsibility to keep out.
ParetoFront pareto_update(const ParetoFront& front, const Observation& obs);

// Affine map per objective: worst observed -> 0, best -> 1 in the improvement
// direction. Constant objectives map to 0.5 and are flagged.
struct NormalizeTransform {
    struct ObjectiveMap {
        Direction direction = Direction::Maximize;
        double worst = 0.0;
        double best = 1.0;
        bool constant = false;
    };
    std::vector<ObjectiveMap> maps;
    std::vector<std::string> warnings;

    double apply(std::size_t objective, double value) const;
    double invert(std::size_t objective, double normalized) const;
};

struct NormalizedObjectives {
    std::vector<ObjectiveVector> values;  // aligned with the input order
    NormalizeTransform transform;
};

NormalizedObjectives normalize(const std::vector<ObjectiveVector>& values,
                               const std::vector<Direction>& dirs);

// Anti-ideal point in normalized improvement space (all objectives maximize).
struct ReferencePoint {
    ObjectiveVector values;
};

// Per objective: a user threshold is normalized and used directly; otherwise
// the 10th percentile of normalized values minus a 0.1 margin, clamped so the
// result is dominated by every member of the (normalized) front.
ReferencePoint infer_reference_point(const std::vector<ObjectiveVector>& normalized,
                                     const std::vector<ObjectiveSpec>& specs,
                                     const NormalizeTransform& transform);

// Exact dominated area of a 2-D front against `ref`, both objectives in
// maximize orientation. Errors when a point does not weakly dominate ref.
double hypervolume2d(const std::vector<ObjectiveVector>& front,
                     const ReferencePoint& ref);

}  // namespace greenfront
