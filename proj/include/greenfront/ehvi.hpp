#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "greenfront/pareto.hpp"

namespace greenfront {

// Per-objective posterior of a point in normalized objective space.
struct GaussianPair {
    double mean = 0.0;
    double variance = 0.0;
};

using PointPosterior = std::vector<GaussianPair>;  // one entry per objective

// Monte-Carlo noisy expected hypervolume improvement (q = 1, m = 2).
// Each draw resamples the front members from their own posteriors before the
// hypervolume difference is taken, so observation noise on the incumbent
// front is accounted for. Deterministic for a fixed seed; the front draws
// and the candidate's standard normal deviates depend on the seed alone, so
// evaluations at different candidates share common random numbers.
double ehvi(const PointPosterior& candidate,
            const std::vector<PointPosterior>& front,
            const ReferencePoint& ref, std::size_t mc_samples,
            std::uint64_t seed);

// Precomputes the per-draw front samples and candidate deviates once, for
// acquisition loops that score many candidates under one seed. ehvi(...) is
// equivalent to EhviEvaluator(front, ref, n, seed).value(candidate).
class EhviEvaluator {
public:
    EhviEvaluator(const std::vector<PointPosterior>& front, const ReferencePoint& ref,
                  std::size_t mc_samples, std::uint64_t seed);

    double value(const PointPosterior& candidate) const;

private:
    std::size_t draws_;
    std::size_t front_size_;
    std::array<double, 2> ref_;
    std::vector<double> front_draws_;     // draws x front x 2
    std::vector<double> candidate_devs_;  // draws x 2, standard normal
};

}  // namespace greenfront
