#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace greenfront {

// Seeded random stream with portable normal deviates. std::normal_distribution
// is implementation-defined, so Box-Muller is done by hand to keep results
// reproducible across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform index in [0, n).
    std::size_t uniform_index(std::size_t n) {
        if (n == 0) return 0;
        auto idx = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return idx >= n ? n - 1 : idx;
    }

    // Standard normal deviate (Box-Muller, cached spare).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace greenfront
