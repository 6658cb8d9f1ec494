#include "greenfront/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace greenfront {

Direction direction_from_string(const std::string& text) {
    if (text == "maximize" || text == "max") return Direction::Maximize;
    if (text == "minimize" || text == "min") return Direction::Minimize;
    throw std::invalid_argument("unknown direction '" + text + "'");
}

std::string to_string(Direction direction) {
    return direction == Direction::Maximize ? "maximize" : "minimize";
}

std::string to_string(TrialStatus status) {
    switch (status) {
        case TrialStatus::Ok: return "ok";
        case TrialStatus::Failed: return "failed";
        case TrialStatus::Oom: return "oom";
    }
    return "failed";
}

TrialStatus trial_status_from_string(const std::string& text) {
    if (text == "ok") return TrialStatus::Ok;
    if (text == "oom") return TrialStatus::Oom;
    if (text == "failed") return TrialStatus::Failed;
    throw std::invalid_argument("unknown trial status '" + text + "'");
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b,
               const std::vector<Direction>& dirs) {
    if (a.size() != b.size() || a.size() != dirs.size()) {
        throw std::invalid_argument("objective arity mismatch");
    }
    bool strictly_better = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double sign = dirs[i] == Direction::Maximize ? 1.0 : -1.0;
        const double diff = sign * (a[i] - b[i]);
        if (diff < 0.0) return false;
        if (diff > 0.0) strictly_better = true;
    }
    return strictly_better;
}

ParetoFront pareto_update(const ParetoFront& front, const Observation& obs) {
    ParetoFront next;
    next.directions = front.directions;
    for (const Observation& member : front.members) {
        if (dominates(member.objectives, obs.objectives, front.directions)) {
            return front;  // obs is dominated; nothing changes
        }
        if (!dominates(obs.objectives, member.objectives, front.directions)) {
            next.members.push_back(member);
        }
    }
    next.members.push_back(obs);
    return next;
}

double NormalizeTransform::apply(std::size_t objective, double value) const {
    const ObjectiveMap& map = maps.at(objective);
    if (map.constant) return 0.5;
    return (value - map.worst) / (map.best - map.worst);
}

double NormalizeTransform::invert(std::size_t objective, double normalized) const {
    const ObjectiveMap& map = maps.at(objective);
    if (map.constant) return map.worst;
    return map.worst + normalized * (map.best - map.worst);
}

NormalizedObjectives normalize(const std::vector<ObjectiveVector>& values,
                               const std::vector<Direction>& dirs) {
    if (values.empty()) {
        throw std::invalid_argument("normalize requires at least one observation");
    }
    const std::size_t arity = dirs.size();
    for (const auto& v : values) {
        if (v.size() != arity) {
            throw std::invalid_argument("objective arity mismatch");
        }
    }

    NormalizedObjectives out;
    out.transform.maps.resize(arity);
    for (std::size_t i = 0; i < arity; ++i) {
        double lo = values[0][i];
        double hi = values[0][i];
        for (const auto& v : values) {
            lo = std::min(lo, v[i]);
            hi = std::max(hi, v[i]);
        }
        auto& map = out.transform.maps[i];
        map.direction = dirs[i];
        if (lo == hi) {
            map.constant = true;
            map.worst = lo;
            map.best = hi;
            out.transform.warnings.push_back(
                "objective " + std::to_string(i) +
                " is constant over the observations; normalized to 0.5");
        } else if (dirs[i] == Direction::Maximize) {
            map.worst = lo;
            map.best = hi;
        } else {
            map.worst = hi;
            map.best = lo;
        }
    }

    out.values.reserve(values.size());
    for (const auto& v : values) {
        ObjectiveVector normalized(arity);
        for (std::size_t i = 0; i < arity; ++i) {
            normalized[i] = out.transform.apply(i, v[i]);
        }
        out.values.push_back(std::move(normalized));
    }
    return out;
}

namespace {

// Linear-interpolation percentile over a sorted copy.
double percentile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values.front();
    const double rank = p * static_cast<double>(values.size() - 1);
    const auto lower = static_cast<std::size_t>(std::floor(rank));
    const auto upper = std::min(lower + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(lower);
    return values[lower] * (1.0 - frac) + values[upper] * frac;
}

}  // namespace

ReferencePoint infer_reference_point(const std::vector<ObjectiveVector>& normalized,
                                     const std::vector<ObjectiveSpec>& specs,
                                     const NormalizeTransform& transform) {
    if (normalized.empty()) {
        throw std::invalid_argument("reference point requires at least one observation");
    }
    const std::size_t arity = specs.size();

    // Normalized front minima, used to keep the result dominated by every member.
    std::vector<Direction> max_dirs(arity, Direction::Maximize);
    std::vector<ObjectiveVector> front;
    for (const auto& candidate : normalized) {
        bool dominated = false;
        for (const auto& other : normalized) {
            if (dominates(other, candidate, max_dirs)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) front.push_back(candidate);
    }

    ReferencePoint ref;
    ref.values.resize(arity);
    for (std::size_t i = 0; i < arity; ++i) {
        double value;
        if (specs[i].threshold.has_value()) {
            value = transform.apply(i, *specs[i].threshold);
        } else {
            std::vector<double> column;
            column.reserve(normalized.size());
            for (const auto& v : normalized) column.push_back(v[i]);
            value = percentile(std::move(column), 0.10) - 0.1;
            double front_min = front.front()[i];
            for (const auto& member : front) front_min = std::min(front_min, member[i]);
            value = std::min(value, front_min - 1e-9);
        }
        ref.values[i] = value;
    }
    return ref;
}

double hypervolume2d(const std::vector<ObjectiveVector>& front,
                     const ReferencePoint& ref) {
    if (ref.values.size() != 2) {
        throw std::invalid_argument("hypervolume2d requires a 2-D reference point");
    }
    std::vector<std::pair<double, double>> points;
    points.reserve(front.size());
    for (const auto& p : front) {
        if (p.size() != 2) {
            throw std::invalid_argument("hypervolume2d requires 2-D points");
        }
        if (p[0] < ref.values[0] || p[1] < ref.values[1]) {
            throw std::invalid_argument("front point does not dominate the reference point");
        }
        points.emplace_back(p[0], p[1]);
    }
    std::sort(points.begin(), points.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    double area = 0.0;
    double covered_y = ref.values[1];
    for (const auto& [x, y] : points) {
        if (y > covered_y) {
            area += (x - ref.values[0]) * (y - covered_y);
            covered_y = y;
        }
    }
    return area;
}

}  // namespace greenfront
