#include "greenfront/sobol.hpp"

#include <bit>
#include <stdexcept>

namespace greenfront {
namespace {

// First rows of the Joe-Kuo new-joe-kuo-6 direction-number table
// (https://web.maths.unsw.edu.au/~fkuo/sobol/). Dimension 0 is the
// van der Corput sequence and needs no entry.
struct JoeKuoRow {
    unsigned degree;
    unsigned poly;     // interior coefficients of the primitive polynomial
    unsigned m[7];     // initial direction integers, m[0..degree-1]
};

constexpr JoeKuoRow kJoeKuo[] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 3, 25, 1}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 41, 67, 103}},
};

constexpr unsigned kBits = 32;

std::vector<std::uint32_t> build_directions(std::size_t dimension) {
    std::vector<std::uint32_t> v(dimension * kBits, 0);
    if (dimension == 0) return v;

    // Dimension 0: v_k = 2^(31-k).
    for (unsigned k = 0; k < kBits; ++k) {
        v[k] = 1u << (kBits - 1 - k);
    }

    for (std::size_t d = 1; d < dimension; ++d) {
        const JoeKuoRow& row = kJoeKuo[d - 1];
        const unsigned s = row.degree;
        std::uint64_t m[kBits + 1];
        for (unsigned k = 0; k < s; ++k) m[k + 1] = row.m[k];
        for (unsigned k = s + 1; k <= kBits; ++k) {
            std::uint64_t value = m[k - s] ^ (m[k - s] << s);
            for (unsigned i = 1; i < s; ++i) {
                const std::uint64_t coeff = (row.poly >> (s - 1 - i)) & 1u;
                value ^= (coeff * m[k - i]) << i;
            }
            m[k] = value;
        }
        for (unsigned k = 1; k <= kBits; ++k) {
            v[d * kBits + (k - 1)] =
                static_cast<std::uint32_t>(m[k] << (kBits - k));
        }
    }
    return v;
}

}  // namespace

SobolSequence::SobolSequence(std::size_t dimension)
    : dimension_(dimension), state_(dimension, 0) {
    if (dimension > kMaxDimension) {
        throw std::invalid_argument(
            "SobolSequence supports at most " +
            std::to_string(kMaxDimension) + " dimensions; got " +
            std::to_string(dimension));
    }
    direction_ = build_directions(dimension);
}

std::vector<double> SobolSequence::next() {
    ++index_;
    const unsigned bit = std::countr_zero(index_);
    std::vector<double> point(dimension_);
    for (std::size_t d = 0; d < dimension_; ++d) {
        state_[d] ^= direction_[d * kBits + bit];
        point[d] = static_cast<double>(state_[d]) * 0x1.0p-32;
    }
    return point;
}

void SobolSequence::skip(std::uint64_t count) {
    for (std::uint64_t i = 0; i < count; ++i) {
        ++index_;
        const unsigned bit = std::countr_zero(index_);
        for (std::size_t d = 0; d < dimension_; ++d) {
            state_[d] ^= direction_[d * kBits + bit];
        }
    }
}

}  // namespace greenfront
