#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace greenfront {

enum class SpecKind { Range, Choice, Fixed };
enum class ValueType { Integer, Float, Boolean };

using ParamValue = std::variant<bool, std::int64_t, double>;

std::string to_string(const ParamValue& value);
double as_double(const ParamValue& value);

// One hyperparameter and its domain.
struct HyperparameterSpec {
    std::string name;
    SpecKind kind = SpecKind::Range;
    ValueType value_type = ValueType::Float;
    double lo = 0.0;                  // range only
    double hi = 0.0;                  // range only
    std::vector<ParamValue> values;   // choice only
    ParamValue value;                 // fixed only
    bool log_scale = false;           // range-float only

    static HyperparameterSpec int_range(std::string name, std::int64_t lo, std::int64_t hi);
    static HyperparameterSpec float_range(std::string name, double lo, double hi, bool log_scale = false);
    static HyperparameterSpec choice(std::string name, ValueType type, std::vector<ParamValue> values);
    static HyperparameterSpec fixed(std::string name, ParamValue value);

    bool contains(const ParamValue& v) const;
};

// Assignment of one value per spec, kept in spec order.
struct Configuration {
    std::vector<std::pair<std::string, ParamValue>> assignments;

    const ParamValue* find(const std::string& name) const;
    const ParamValue& at(const std::string& name) const;
    void set(const std::string& name, ParamValue value);

    bool operator==(const Configuration& other) const = default;
};

// Point in the unit hypercube; one coordinate per range spec, in spec order.
// Choice and fixed specs are handled by enumeration, not embedding.
struct UnitPoint {
    std::vector<double> coords;

    bool operator==(const UnitPoint& other) const = default;
};

struct SearchSpace {
    std::vector<HyperparameterSpec> specs;

    // Count of non-fixed specs (range + choice).
    std::size_t dimensionality() const;
    // Count of range specs: the dimension of the encoded unit cube.
    std::size_t range_dimension() const;
    std::vector<const HyperparameterSpec*> choice_specs() const;

    const HyperparameterSpec* find(const std::string& name) const;
};

// Returns an empty list iff the space satisfies every invariant; otherwise
// one message per violation, each naming the offending spec.
std::vector<std::string> validate_space(const SearchSpace& space);

// Product of per-spec domain sizes; nullopt when any float range makes the
// space uncountable.
std::optional<std::uint64_t> cardinality(const SearchSpace& space);

UnitPoint encode(const Configuration& config, const SearchSpace& space);

Configuration decode(const UnitPoint& point,
                     const std::map<std::string, ParamValue>& choice_assignment,
                     const SearchSpace& space);

// n configurations: range coordinates from the base-2 Sobol' sequence
// (index 0 skipped), choice values from a seeded uniform stream.
std::vector<Configuration> sobol_sample(const SearchSpace& space, std::size_t n,
                                        std::uint64_t seed);

// Search-space file format: a JSON list of
//   {"name": str, "type": "range"|"choice"|"fixed",
//    "data_type": "int"|"float"|"bool",
//    "bounds": [lo, hi] | "values": [...] | "value": v, "log": bool}
SearchSpace load_search_space(const std::string& path);
SearchSpace parse_search_space(const std::string& json_text);

}  // namespace greenfront
