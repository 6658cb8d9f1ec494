#include "greenfront/ehvi.hpp"

#include <cmath>
#include <stdexcept>

#include "greenfront/kernels.hpp"
#include "greenfront/rng.hpp"

namespace greenfront {

EhviEvaluator::EhviEvaluator(const std::vector<PointPosterior>& front,
                             const ReferencePoint& ref, std::size_t mc_samples,
                             std::uint64_t seed)
    : draws_(mc_samples), front_size_(front.size()) {
    if (mc_samples < 1) {
        throw std::invalid_argument("ehvi requires at least one Monte-Carlo sample");
    }
    if (ref.values.size() != 2) {
        throw std::invalid_argument("ehvi is implemented for two objectives");
    }
    for (const auto& member : front) {
        if (member.size() != 2) {
            throw std::invalid_argument("ehvi is implemented for two objectives");
        }
        if (member[0].variance < 0.0 || member[1].variance < 0.0) {
            throw std::invalid_argument("negative posterior variance");
        }
    }
    ref_ = {ref.values[0], ref.values[1]};

    // Separate streams so the front resampling does not depend on the
    // candidate and vice versa.
    Rng front_rng(seed);
    front_draws_.resize(draws_ * front_size_ * 2);
    for (std::size_t s = 0; s < draws_; ++s) {
        for (std::size_t i = 0; i < front_size_; ++i) {
            for (std::size_t o = 0; o < 2; ++o) {
                const GaussianPair& p = front[i][o];
                front_draws_[(s * front_size_ + i) * 2 + o] =
                    p.mean + std::sqrt(p.variance) * front_rng.normal();
            }
        }
    }

    Rng candidate_rng(seed ^ 0x9e3779b97f4a7c15ull);
    candidate_devs_.resize(draws_ * 2);
    for (double& dev : candidate_devs_) dev = candidate_rng.normal();
}

double EhviEvaluator::value(const PointPosterior& candidate) const {
    if (candidate.size() != 2) {
        throw std::invalid_argument("ehvi is implemented for two objectives");
    }
    const double sd0 = std::sqrt(std::max(candidate[0].variance, 0.0));
    const double sd1 = std::sqrt(std::max(candidate[1].variance, 0.0));

    std::vector<double> candidate_draws(draws_ * 2);
    for (std::size_t s = 0; s < draws_; ++s) {
        candidate_draws[s * 2] = candidate[0].mean + sd0 * candidate_devs_[s * 2];
        candidate_draws[s * 2 + 1] = candidate[1].mean + sd1 * candidate_devs_[s * 2 + 1];
    }

    const std::vector<double> improvements = kernels::hv_improvement_draws(
        draws_, front_size_, front_draws_, candidate_draws, ref_);

    double total = 0.0;
    for (const double value : improvements) total += value;
    return total / static_cast<double>(draws_);
}

double ehvi(const PointPosterior& candidate, const std::vector<PointPosterior>& front,
            const ReferencePoint& ref, std::size_t mc_samples, std::uint64_t seed) {
    return EhviEvaluator(front, ref, mc_samples, seed).value(candidate);
}

}  // namespace greenfront
