#include "greenfront/search_space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "greenfront/rng.hpp"
#include "greenfront/sobol.hpp"

namespace greenfront {

std::string to_string(const ParamValue& value) {
    if (std::holds_alternative<bool>(value)) {
        return std::get<bool>(value) ? "true" : "false";
    }
    if (std::holds_alternative<std::int64_t>(value)) {
        return std::to_string(std::get<std::int64_t>(value));
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", std::get<double>(value));
    return buf;
}

double as_double(const ParamValue& value) {
    if (std::holds_alternative<bool>(value)) return std::get<bool>(value) ? 1.0 : 0.0;
    if (std::holds_alternative<std::int64_t>(value)) {
        return static_cast<double>(std::get<std::int64_t>(value));
    }
    return std::get<double>(value);
}

HyperparameterSpec HyperparameterSpec::int_range(std::string name, std::int64_t lo,
                                                 std::int64_t hi) {
    HyperparameterSpec spec;
    spec.name = std::move(name);
    spec.kind = SpecKind::Range;
    spec.value_type = ValueType::Integer;
    spec.lo = static_cast<double>(lo);
    spec.hi = static_cast<double>(hi);
    return spec;
}

HyperparameterSpec HyperparameterSpec::float_range(std::string name, double lo, double hi,
                                                   bool log_scale) {
    HyperparameterSpec spec;
    spec.name = std::move(name);
    spec.kind = SpecKind::Range;
    spec.value_type = ValueType::Float;
    spec.lo = lo;
    spec.hi = hi;
    spec.log_scale = log_scale;
    return spec;
}

HyperparameterSpec HyperparameterSpec::choice(std::string name, ValueType type,
                                              std::vector<ParamValue> values) {
    HyperparameterSpec spec;
    spec.name = std::move(name);
    spec.kind = SpecKind::Choice;
    spec.value_type = type;
    spec.values = std::move(values);
    return spec;
}

HyperparameterSpec HyperparameterSpec::fixed(std::string name, ParamValue value) {
    HyperparameterSpec spec;
    spec.name = std::move(name);
    spec.kind = SpecKind::Fixed;
    if (std::holds_alternative<bool>(value)) {
        spec.value_type = ValueType::Boolean;
    } else if (std::holds_alternative<std::int64_t>(value)) {
        spec.value_type = ValueType::Integer;
    } else {
        spec.value_type = ValueType::Float;
    }
    spec.value = value;
    return spec;
}

bool HyperparameterSpec::contains(const ParamValue& v) const {
    switch (kind) {
        case SpecKind::Range: {
            const double x = as_double(v);
            if (value_type == ValueType::Integer &&
                !std::holds_alternative<std::int64_t>(v)) {
                return false;
            }
            return x >= lo && x <= hi;
        }
        case SpecKind::Choice:
            return std::find(values.begin(), values.end(), v) != values.end();
        case SpecKind::Fixed:
            return v == value;
    }
    return false;
}

const ParamValue* Configuration::find(const std::string& name) const {
    for (const auto& [key, value] : assignments) {
        if (key == name) return &value;
    }
    return nullptr;
}

const ParamValue& Configuration::at(const std::string& name) const {
    const ParamValue* value = find(name);
    if (value == nullptr) {
        throw std::out_of_range("configuration has no parameter '" + name + "'");
    }
    return *value;
}

void Configuration::set(const std::string& name, ParamValue value) {
    for (auto& [key, existing] : assignments) {
        if (key == name) {
            existing = std::move(value);
            return;
        }
    }
    assignments.emplace_back(name, std::move(value));
}

std::size_t SearchSpace::dimensionality() const {
    std::size_t count = 0;
    for (const auto& spec : specs) {
        if (spec.kind != SpecKind::Fixed) ++count;
    }
    return count;
}

std::size_t SearchSpace::range_dimension() const {
    std::size_t count = 0;
    for (const auto& spec : specs) {
        if (spec.kind == SpecKind::Range) ++count;
    }
    return count;
}

std::vector<const HyperparameterSpec*> SearchSpace::choice_specs() const {
    std::vector<const HyperparameterSpec*> out;
    for (const auto& spec : specs) {
        if (spec.kind == SpecKind::Choice) out.push_back(&spec);
    }
    return out;
}

const HyperparameterSpec* SearchSpace::find(const std::string& name) const {
    for (const auto& spec : specs) {
        if (spec.name == name) return &spec;
    }
    return nullptr;
}

std::vector<std::string> validate_space(const SearchSpace& space) {
    std::vector<std::string> violations;
    if (space.specs.empty()) {
        violations.push_back("search space has no specs");
        return violations;
    }
    std::set<std::string> seen;
    for (const auto& spec : space.specs) {
        if (spec.name.empty()) {
            violations.push_back("spec with empty name");
            continue;
        }
        if (!seen.insert(spec.name).second) {
            violations.push_back("duplicate name '" + spec.name + "'");
        }
        switch (spec.kind) {
            case SpecKind::Range:
                if (spec.lo > spec.hi) {
                    violations.push_back("'" + spec.name + "': lo > hi");
                }
                if (spec.value_type == ValueType::Boolean) {
                    violations.push_back("'" + spec.name + "': boolean range not supported");
                }
                if (spec.log_scale && spec.value_type != ValueType::Float) {
                    violations.push_back("'" + spec.name + "': log scale requires a float range");
                }
                if (spec.log_scale && spec.lo <= 0.0) {
                    violations.push_back("'" + spec.name + "': log scale requires lo > 0");
                }
                break;
            case SpecKind::Choice: {
                if (spec.values.empty()) {
                    violations.push_back("'" + spec.name + "': choice requires at least one value");
                }
                std::set<std::string> distinct;
                for (const auto& v : spec.values) distinct.insert(to_string(v));
                if (distinct.size() != spec.values.size()) {
                    violations.push_back("'" + spec.name + "': choice values not distinct");
                }
                break;
            }
            case SpecKind::Fixed:
                break;
        }
    }
    return violations;
}

std::optional<std::uint64_t> cardinality(const SearchSpace& space) {
    std::uint64_t product = 1;
    for (const auto& spec : space.specs) {
        std::uint64_t size = 1;
        switch (spec.kind) {
            case SpecKind::Range:
                if (spec.value_type == ValueType::Float) return std::nullopt;
                size = static_cast<std::uint64_t>(spec.hi - spec.lo) + 1;
                break;
            case SpecKind::Choice:
                size = spec.values.size();
                break;
            case SpecKind::Fixed:
                size = 1;
                break;
        }
        if (size != 0 && product > UINT64_MAX / size) {
            throw std::overflow_error("search-space cardinality overflows 64 bits");
        }
        product *= size;
    }
    return product;
}

UnitPoint encode(const Configuration& config, const SearchSpace& space) {
    UnitPoint point;
    for (const auto& spec : space.specs) {
        if (spec.kind != SpecKind::Range) continue;
        const ParamValue* value = config.find(spec.name);
        if (value == nullptr) {
            throw std::invalid_argument("configuration missing parameter '" + spec.name + "'");
        }
        if (!spec.contains(*value)) {
            throw std::invalid_argument("value " + to_string(*value) +
                                        " outside domain of '" + spec.name + "'");
        }
        const double v = as_double(*value);
        double coord = 0.0;
        if (spec.lo < spec.hi) {
            if (spec.log_scale) {
                coord = (std::log(v) - std::log(spec.lo)) /
                        (std::log(spec.hi) - std::log(spec.lo));
            } else {
                coord = (v - spec.lo) / (spec.hi - spec.lo);
            }
        }
        point.coords.push_back(std::clamp(coord, 0.0, 1.0));
    }
    return point;
}

Configuration decode(const UnitPoint& point,
                     const std::map<std::string, ParamValue>& choice_assignment,
                     const SearchSpace& space) {
    Configuration config;
    std::size_t coord_index = 0;
    for (const auto& spec : space.specs) {
        switch (spec.kind) {
            case SpecKind::Range: {
                if (coord_index >= point.coords.size()) {
                    throw std::invalid_argument("unit point has too few coordinates");
                }
                const double u = point.coords[coord_index++];
                if (u < 0.0 || u > 1.0) {
                    throw std::invalid_argument("coordinate " + std::to_string(u) +
                                                " outside [0,1] for '" + spec.name + "'");
                }
                if (spec.value_type == ValueType::Integer) {
                    // Stratified decode: every integer gets equal unit-cube measure.
                    const auto lo = static_cast<std::int64_t>(spec.lo);
                    const auto hi = static_cast<std::int64_t>(spec.hi);
                    const auto span = static_cast<double>(hi - lo + 1);
                    auto v = lo + static_cast<std::int64_t>(std::floor(u * span));
                    config.set(spec.name, std::min(hi, v));
                } else if (spec.log_scale) {
                    const double v = std::exp(std::log(spec.lo) +
                                              u * (std::log(spec.hi) - std::log(spec.lo)));
                    config.set(spec.name, std::clamp(v, spec.lo, spec.hi));
                } else {
                    config.set(spec.name, spec.lo + u * (spec.hi - spec.lo));
                }
                break;
            }
            case SpecKind::Choice: {
                auto it = choice_assignment.find(spec.name);
                if (it == choice_assignment.end()) {
                    throw std::invalid_argument("choice assignment missing '" + spec.name + "'");
                }
                if (!spec.contains(it->second)) {
                    throw std::invalid_argument("value " + to_string(it->second) +
                                                " outside domain of '" + spec.name + "'");
                }
                config.set(spec.name, it->second);
                break;
            }
            case SpecKind::Fixed:
                config.set(spec.name, spec.value);
                break;
        }
    }
    return config;
}

std::vector<Configuration> sobol_sample(const SearchSpace& space, std::size_t n,
                                        std::uint64_t seed) {
    std::vector<Configuration> out;
    out.reserve(n);
    SobolSequence sobol(space.range_dimension());
    Rng choice_rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        UnitPoint point{sobol.next()};
        std::map<std::string, ParamValue> choices;
        for (const HyperparameterSpec* spec : space.choice_specs()) {
            choices[spec->name] = spec->values[choice_rng.uniform_index(spec->values.size())];
        }
        out.push_back(decode(point, choices, space));
    }
    return out;
}

namespace {

using nlohmann::json;

ParamValue param_from_json(const json& j, ValueType type) {
    switch (type) {
        case ValueType::Boolean:
            if (!j.is_boolean()) throw std::invalid_argument("expected boolean value");
            return j.get<bool>();
        case ValueType::Integer:
            if (!j.is_number_integer()) throw std::invalid_argument("expected integer value");
            return j.get<std::int64_t>();
        case ValueType::Float:
            if (!j.is_number()) throw std::invalid_argument("expected numeric value");
            return j.get<double>();
    }
    throw std::invalid_argument("unknown value type");
}

}  // namespace

SearchSpace parse_search_space(const std::string& json_text) {
    json doc = json::parse(json_text);
    if (!doc.is_array()) {
        throw std::invalid_argument("search-space document must be a JSON list of specs");
    }
    SearchSpace space;
    for (const auto& entry : doc) {
        HyperparameterSpec spec;
        spec.name = entry.at("name").get<std::string>();

        const std::string type = entry.at("type").get<std::string>();
        if (type == "range") {
            spec.kind = SpecKind::Range;
        } else if (type == "choice") {
            spec.kind = SpecKind::Choice;
        } else if (type == "fixed") {
            spec.kind = SpecKind::Fixed;
        } else {
            throw std::invalid_argument("'" + spec.name + "': unknown type '" + type + "'");
        }

        const std::string data_type = entry.at("data_type").get<std::string>();
        if (data_type == "int") {
            spec.value_type = ValueType::Integer;
        } else if (data_type == "float") {
            spec.value_type = ValueType::Float;
        } else if (data_type == "bool") {
            spec.value_type = ValueType::Boolean;
        } else {
            throw std::invalid_argument("'" + spec.name + "': unknown data_type '" + data_type + "'");
        }

        switch (spec.kind) {
            case SpecKind::Range: {
                const auto& bounds = entry.at("bounds");
                if (!bounds.is_array() || bounds.size() != 2) {
                    throw std::invalid_argument("'" + spec.name + "': bounds must be [lo, hi]");
                }
                spec.lo = bounds[0].get<double>();
                spec.hi = bounds[1].get<double>();
                spec.log_scale = entry.value("log", false);
                break;
            }
            case SpecKind::Choice: {
                for (const auto& v : entry.at("values")) {
                    spec.values.push_back(param_from_json(v, spec.value_type));
                }
                break;
            }
            case SpecKind::Fixed:
                spec.value = param_from_json(entry.at("value"), spec.value_type);
                break;
        }
        space.specs.push_back(std::move(spec));
    }

    auto violations = validate_space(space);
    if (!violations.empty()) {
        std::ostringstream oss;
        oss << "invalid search space:";
        for (const auto& v : violations) oss << "\n  - " << v;
        throw std::invalid_argument(oss.str());
    }
    return space;
}

SearchSpace load_search_space(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open search-space file '" + path + "'");
    }
    std::ostringstream oss;
    oss << in.rdbuf();
    return parse_search_space(oss.str());
}

}  // namespace greenfront
