#pragma once

#include <cstdint>
#include <vector>

namespace greenfront {

// Gray-code Sobol' sequence, unscrambled, with index 0 (the all-zero point)
// skipped: the first draw is the point of index 1. Direction numbers follow
// the Joe-Kuo "new-joe-kuo-6" table, which bounds the supported dimension.
class SobolSequence {
public:
    static constexpr std::size_t kMaxDimension = 21;

    explicit SobolSequence(std::size_t dimension);

    std::size_t dimension() const { return dimension_; }

    // Index of the next point to be emitted (1-based; starts at 1).
    std::uint64_t next_index() const { return index_ + 1; }

    // Next point in [0,1)^d.
    std::vector<double> next();

    // Advance without materialising the points.
    void skip(std::uint64_t count);

private:
    std::size_t dimension_;
    std::uint64_t index_ = 0;              // points emitted so far
    std::vector<std::uint32_t> state_;     // per-dimension XOR accumulator
    std::vector<std::uint32_t> direction_; // dimension-major, 32 entries each
};

}  // namespace greenfront
