#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "fracpar/operators.hpp"

namespace fracpar {

/// A system read from JSON. Layout:
///   { "n": 1, "N": 1, "b": 1,
///     "principal": [ {"beta": [2], "matrix": [[-1]]} ],
///     "lower":     [ {"beta": [0], "matrix": [["0.1*sin(x)"]]} ],
///     "holder": {"exponent": 1, "constant": 0.5}, "bound": 1.5 }
/// Matrix entries are numbers, expression strings, or {"re": ..., "im": ...}.
/// A scalar system may give "matrix" as a single entry.
struct system_spec {
    variable_system system;
    /// Present when every coefficient is constant and there is no lower part.
    std::optional<constant_operator> constant;
    nlohmann::json source;

    /// The constant operator, or config_error when coefficients vary.
    const constant_operator& require_constant() const;
};

system_spec parse_system(const nlohmann::json& j);
system_spec load_system(const std::string& path);

/// JSON form of a constant operator (round-trips through parse_system).
nlohmann::json to_json(const constant_operator& op);

}  // namespace fracpar
