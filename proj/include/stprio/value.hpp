#pragma once

#include <cstdint>
#include <string>

namespace stprio {

// Declarable variable types of the language subset.
enum class VarType { Bool, Int, Dint, Time, Real };

bool var_type_from_name(const std::string& name, VarType& out);
const char* var_type_name(VarType t);

// Runtime value. INT and DINT share integer storage; the declared type only
// matters for declarations and defaults.
struct Value {
    enum class Kind { Bool, Int, Time, Real };

    Kind kind = Kind::Bool;
    bool b = false;
    std::int64_t i = 0; // integer value, or TIME in milliseconds
    double r = 0.0;

    static Value make_bool(bool v);
    static Value make_int(std::int64_t v);
    static Value make_time(std::int64_t ms);
    static Value make_real(double v);
    static Value default_for(VarType t);

    bool as_bool() const;
    std::int64_t as_int() const;
    std::int64_t as_time() const;
    double as_real() const;

    bool equals(const Value& other) const;
    std::string to_text() const; // literal form: TRUE, 42, 1.5, T#1500ms
};

// Parses "T#..." time literals into milliseconds (components d/h/m/s/ms).
// Returns false on malformed input.
bool parse_time_literal(const std::string& text, std::int64_t& out_ms);

// Canonical literal rendering of a TIME value, e.g. T#93000ms.
std::string time_to_text(std::int64_t ms);

} // namespace stprio
