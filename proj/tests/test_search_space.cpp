#include <doctest.h>

#include <map>
#include <stdexcept>

#include "greenfront/search_space.hpp"

using namespace greenfront;

namespace {

SearchSpace nas_space() {
    // The four-hyperparameter CNN architecture space plus fixed settings.
    SearchSpace space;
    space.specs.push_back(HyperparameterSpec::int_range("layers", 1, 6));
    space.specs.push_back(HyperparameterSpec::choice(
        "max_pool", ValueType::Boolean, {ParamValue{true}, ParamValue{false}}));
    space.specs.push_back(HyperparameterSpec::int_range("filters", 1, 128));
    space.specs.push_back(HyperparameterSpec::choice(
        "kernel_size", ValueType::Integer,
        {ParamValue{std::int64_t{1}}, ParamValue{std::int64_t{3}},
         ParamValue{std::int64_t{5}}, ParamValue{std::int64_t{7}},
         ParamValue{std::int64_t{9}}}));
    space.specs.push_back(HyperparameterSpec::fixed("stride", std::int64_t{1}));
    space.specs.push_back(HyperparameterSpec::fixed("epochs", std::int64_t{500}));
    space.specs.push_back(HyperparameterSpec::fixed("learning_rate", 0.001));
    return space;
}

}  // namespace

TEST_CASE("validate_space reports violations by name") {
    SearchSpace space;
    space.specs.push_back(HyperparameterSpec::float_range("lr", 1e-4, 1e-1));
    space.specs.push_back(HyperparameterSpec::float_range("lr", 1e-3, 1e-2));
    auto violations = validate_space(space);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].find("duplicate name") != std::string::npos);
    CHECK(violations[0].find("lr") != std::string::npos);

    SearchSpace bad_range;
    bad_range.specs.push_back(HyperparameterSpec::int_range("n", 5, 2));
    violations = validate_space(bad_range);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].find("lo > hi") != std::string::npos);

    SearchSpace ok;
    ok.specs.push_back(HyperparameterSpec::int_range("layers", 1, 6));
    CHECK(validate_space(ok).empty());
}

TEST_CASE("validate_space rejects log scale with nonpositive lower bound") {
    SearchSpace space;
    space.specs.push_back(HyperparameterSpec::float_range("lr", 0.0, 1.0, true));
    auto violations = validate_space(space);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].find("lo > 0") != std::string::npos);
}

TEST_CASE("validate_space rejects empty choice") {
    SearchSpace space;
    space.specs.push_back(HyperparameterSpec::choice("c", ValueType::Integer, {}));
    CHECK(validate_space(space).size() == 1);
}

TEST_CASE("cardinality of the CNN architecture space is 7680") {
    auto space = nas_space();
    auto count = cardinality(space);
    REQUIRE(count.has_value());
    CHECK(*count == 7680);  // 6 * 2 * 128 * 5
}

TEST_CASE("cardinality degenerate cases") {
    SearchSpace fixed_only;
    fixed_only.specs.push_back(HyperparameterSpec::fixed("a", std::int64_t{3}));
    fixed_only.specs.push_back(HyperparameterSpec::fixed("b", true));
    CHECK(*cardinality(fixed_only) == 1);

    SearchSpace with_float;
    with_float.specs.push_back(HyperparameterSpec::float_range("x", 0.0, 1.0));
    CHECK_FALSE(cardinality(with_float).has_value());
}

TEST_CASE("cardinality is multiplicative over concatenation") {
    SearchSpace a;
    a.specs.push_back(HyperparameterSpec::int_range("n", 1, 4));
    SearchSpace b;
    b.specs.push_back(HyperparameterSpec::choice(
        "c", ValueType::Integer,
        {ParamValue{std::int64_t{1}}, ParamValue{std::int64_t{2}},
         ParamValue{std::int64_t{3}}}));
    SearchSpace both;
    both.specs = a.specs;
    both.specs.insert(both.specs.end(), b.specs.begin(), b.specs.end());
    CHECK(*cardinality(both) == *cardinality(a) * *cardinality(b));
}

TEST_CASE("encode maps range bounds onto the unit interval") {
    SearchSpace space;
    space.specs.push_back(HyperparameterSpec::int_range("layers", 1, 6));
    space.specs.push_back(HyperparameterSpec::float_range("width", 0.0, 10.0));

    Configuration config;
    config.set("layers", std::int64_t{1});
    config.set("width", 5.0);
    auto point = encode(config, space);
    REQUIRE(point.coords.size() == 2);
    CHECK(point.coords[0] == doctest::Approx(0.0));
    CHECK(point.coords[1] == doctest::Approx(0.5));

    config.set("layers", std::int64_t{6});
    point = encode(config, space);
    CHECK(point.coords[0] == doctest::Approx(1.0));
}

TEST_CASE("encode rejects out-of-domain values") {
    SearchSpace space;
    space.specs.push_back(HyperparameterSpec::int_range("layers", 1, 6));
    Configuration config;
    config.set("layers", std::int64_t{7});
    CHECK_THROWS_AS(encode(config, space), std::invalid_argument);
}

TEST_CASE("decode uses stratified integer bins with clamping") {
    SearchSpace space;
    space.specs.push_back(HyperparameterSpec::int_range("layers", 1, 6));

    auto decoded = decode(UnitPoint{{0.5}}, {}, space);
    CHECK(std::get<std::int64_t>(decoded.at("layers")) == 4);  // 1 + floor(0.5*6)

    decoded = decode(UnitPoint{{1.0}}, {}, space);
    CHECK(std::get<std::int64_t>(decoded.at("layers")) == 6);

    decoded = decode(UnitPoint{{0.0}}, {}, space);
    CHECK(std::get<std::int64_t>(decoded.at("layers")) == 1);
}

TEST_CASE("decode float bounds and errors") {
    SearchSpace space;
    space.specs.push_back(HyperparameterSpec::float_range("w", 0.0, 10.0));
    auto decoded = decode(UnitPoint{{0.0}}, {}, space);
    CHECK(std::get<double>(decoded.at("w")) == doctest::Approx(0.0));

    CHECK_THROWS_AS(decode(UnitPoint{{1.5}}, {}, space), std::invalid_argument);
}

TEST_CASE("encode/decode round-trips grid-aligned values") {
    SearchSpace space;
    space.specs.push_back(HyperparameterSpec::int_range("n", 1, 17));
    space.specs.push_back(HyperparameterSpec::float_range("w", -2.0, 3.0));
    space.specs.push_back(HyperparameterSpec::float_range("lr", 1e-4, 1e-1, true));
    space.specs.push_back(HyperparameterSpec::fixed("seed", std::int64_t{7}));

    for (std::int64_t n = 1; n <= 17; ++n) {
        for (const double w : {-2.0, -0.75, 0.0, 1.25, 3.0}) {
            Configuration config;
            config.set("n", n);
            config.set("w", w);
            config.set("lr", 1e-2);
            config.set("seed", std::int64_t{7});
            auto round = decode(encode(config, space), {}, space);
            CHECK(std::get<std::int64_t>(round.at("n")) == n);
            CHECK(std::get<double>(round.at("w")) == doctest::Approx(w).epsilon(1e-12));
            CHECK(std::get<double>(round.at("lr")) ==
                  doctest::Approx(1e-2).epsilon(1e-12));
            CHECK(std::get<std::int64_t>(round.at("seed")) == 7);
        }
    }
}

TEST_CASE("sobol_sample is deterministic and in range") {
    auto space = nas_space();
    auto a = sobol_sample(space, 33, 42);
    auto b = sobol_sample(space, 33, 42);
    REQUIRE(a.size() == 33);
    CHECK(a == b);

    auto c = sobol_sample(space, 33, 43);
    CHECK(a != c);  // choice stream depends on the seed

    for (const auto& config : a) {
        const auto layers = std::get<std::int64_t>(config.at("layers"));
        CHECK(layers >= 1);
        CHECK(layers <= 6);
        const auto filters = std::get<std::int64_t>(config.at("filters"));
        CHECK(filters >= 1);
        CHECK(filters <= 128);
        CHECK(std::get<std::int64_t>(config.at("stride")) == 1);
    }

    CHECK(sobol_sample(space, 0, 0).empty());
}

TEST_CASE("search-space JSON round trip") {
    const std::string doc = R"([
        {"name": "layers", "type": "range", "data_type": "int", "bounds": [1, 6]},
        {"name": "max_pool", "type": "choice", "data_type": "bool", "values": [true, false]},
        {"name": "filters", "type": "range", "data_type": "int", "bounds": [1, 128]},
        {"name": "kernel_size", "type": "choice", "data_type": "int", "values": [1, 3, 5, 7, 9]},
        {"name": "lr", "type": "range", "data_type": "float", "bounds": [1e-4, 1e-1], "log": true},
        {"name": "stride", "type": "fixed", "data_type": "int", "value": 1}
    ])";
    auto space = parse_search_space(doc);
    REQUIRE(space.specs.size() == 6);
    CHECK(space.dimensionality() == 5);
    CHECK(space.range_dimension() == 3);
    CHECK(space.specs[4].log_scale);
    CHECK_FALSE(cardinality(space).has_value());

    CHECK_THROWS(parse_search_space(R"([{"name": "x", "type": "orbit",
        "data_type": "int", "bounds": [0, 1]}])"));
    CHECK_THROWS(parse_search_space(R"([{"name": "x", "type": "range",
        "data_type": "int", "bounds": [5, 2]}])"));
}
