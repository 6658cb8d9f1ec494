#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "greenfront/sobol.hpp"

using greenfront::SobolSequence;

TEST_CASE("canonical one-dimensional prefix") {
    // Reference values of the unscrambled gray-code construction with the
    // all-zero index-0 point skipped.
    SobolSequence seq(1);
    CHECK(seq.next()[0] == doctest::Approx(0.5));
    CHECK(seq.next()[0] == doctest::Approx(0.75));
    CHECK(seq.next()[0] == doctest::Approx(0.25));
    CHECK(seq.next()[0] == doctest::Approx(0.375));
    CHECK(seq.next()[0] == doctest::Approx(0.875));
}

TEST_CASE("canonical two-dimensional prefix") {
    SobolSequence seq(2);
    const auto p1 = seq.next();
    CHECK(p1[0] == doctest::Approx(0.5));
    CHECK(p1[1] == doctest::Approx(0.5));
    const auto p2 = seq.next();
    CHECK(p2[0] == doctest::Approx(0.75));
    CHECK(p2[1] == doctest::Approx(0.25));
    const auto p3 = seq.next();
    CHECK(p3[0] == doctest::Approx(0.25));
    CHECK(p3[1] == doctest::Approx(0.75));
}

TEST_CASE("all coordinates stay in [0, 1)") {
    SobolSequence seq(8);
    for (int i = 0; i < 2000; ++i) {
        for (const double x : seq.next()) {
            CHECK(x >= 0.0);
            CHECK(x < 1.0);
        }
    }
}

TEST_CASE("dyadic stratification per dimension") {
    // With index 0 skipped, the first 2^k - 1 points fill every nonzero
    // dyadic slot {j/2^k : j = 1..2^k-1} exactly once in each dimension.
    for (const unsigned k : {2u, 3u, 4u, 6u}) {
        const std::size_t n = (1u << k) - 1;
        SobolSequence seq(5);
        std::vector<std::vector<double>> points;
        for (std::size_t i = 0; i < n; ++i) points.push_back(seq.next());
        for (std::size_t d = 0; d < 5; ++d) {
            std::set<std::uint64_t> slots;
            for (const auto& p : points) {
                slots.insert(static_cast<std::uint64_t>(p[d] * (1u << k)));
            }
            CHECK(slots.size() == n);            // all distinct
            CHECK(slots.count(0) == 0);          // the zero slot stays empty
        }
    }
}

TEST_CASE("aligned power-of-two blocks are balanced") {
    // Any aligned block of 2^k consecutive indices covers each dyadic
    // interval of width 1/2^k exactly once.
    const unsigned k = 4;
    SobolSequence seq(3);
    seq.skip((1u << k) - 1);  // move to index 2^k
    for (int block = 0; block < 3; ++block) {
        std::vector<std::vector<double>> points;
        for (unsigned i = 0; i < (1u << k); ++i) points.push_back(seq.next());
        for (std::size_t d = 0; d < 3; ++d) {
            std::set<std::uint64_t> slots;
            for (const auto& p : points) {
                slots.insert(static_cast<std::uint64_t>(p[d] * (1u << k)));
            }
            CHECK(slots.size() == (1u << k));
        }
    }
}

TEST_CASE("skip matches generate-and-discard") {
    SobolSequence a(4);
    SobolSequence b(4);
    for (int i = 0; i < 37; ++i) a.next();
    b.skip(37);
    CHECK(a.next() == b.next());
    CHECK(a.next_index() == b.next_index());
}

TEST_CASE("dimension limit enforced") {
    CHECK_NOTHROW(SobolSequence{SobolSequence::kMaxDimension});
    CHECK_THROWS_AS(SobolSequence{SobolSequence::kMaxDimension + 1},
                    std::invalid_argument);
}
