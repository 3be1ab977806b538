#include "stprio/value.hpp"

#include "stprio/diag.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace stprio {

bool var_type_from_name(const std::string& name, VarType& out) {
    if (name == "BOOL") { out = VarType::Bool; return true; }
    if (name == "INT") { out = VarType::Int; return true; }
    if (name == "DINT") { out = VarType::Dint; return true; }
    if (name == "TIME") { out = VarType::Time; return true; }
    if (name == "REAL") { out = VarType::Real; return true; }
    return false;
}

const char* var_type_name(VarType t) {
    switch (t) {
    case VarType::Bool: return "BOOL";
    case VarType::Int: return "INT";
    case VarType::Dint: return "DINT";
    case VarType::Time: return "TIME";
    case VarType::Real: return "REAL";
    }
    return "?";
}

Value Value::make_bool(bool v) {
    Value out;
    out.kind = Kind::Bool;
    out.b = v;
    return out;
}

Value Value::make_int(std::int64_t v) {
    Value out;
    out.kind = Kind::Int;
    out.i = v;
    return out;
}

Value Value::make_time(std::int64_t ms) {
    Value out;
    out.kind = Kind::Time;
    out.i = ms;
    return out;
}

Value Value::make_real(double v) {
    Value out;
    out.kind = Kind::Real;
    out.r = v;
    return out;
}

Value Value::default_for(VarType t) {
    switch (t) {
    case VarType::Bool: return make_bool(false);
    case VarType::Int:
    case VarType::Dint: return make_int(0);
    case VarType::Time: return make_time(0);
    case VarType::Real: return make_real(0.0);
    }
    return make_bool(false);
}

bool Value::as_bool() const {
    if (kind != Kind::Bool) fail(ErrorCode::RuntimeFault, "expected BOOL value");
    return b;
}

std::int64_t Value::as_int() const {
    if (kind != Kind::Int) fail(ErrorCode::RuntimeFault, "expected integer value");
    return i;
}

std::int64_t Value::as_time() const {
    if (kind != Kind::Time) fail(ErrorCode::RuntimeFault, "expected TIME value");
    return i;
}

double Value::as_real() const {
    if (kind == Kind::Real) return r;
    if (kind == Kind::Int) return static_cast<double>(i);
    fail(ErrorCode::RuntimeFault, "expected numeric value");
}

bool Value::equals(const Value& other) const {
    if (kind != other.kind) {
        // INT/REAL cross comparison is intentional for expect() convenience.
        if ((kind == Kind::Int && other.kind == Kind::Real) ||
            (kind == Kind::Real && other.kind == Kind::Int)) {
            return as_real() == other.as_real();
        }
        return false;
    }
    switch (kind) {
    case Kind::Bool: return b == other.b;
    case Kind::Int:
    case Kind::Time: return i == other.i;
    case Kind::Real: return r == other.r;
    }
    return false;
}

std::string Value::to_text() const {
    switch (kind) {
    case Kind::Bool: return b ? "TRUE" : "FALSE";
    case Kind::Int: return std::to_string(i);
    case Kind::Time: return time_to_text(i);
    case Kind::Real: {
        std::ostringstream os;
        os << r;
        std::string s = os.str();
        if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
            s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
            s += ".0";
        }
        return s;
    }
    }
    return "?";
}

bool parse_time_literal(const std::string& text, std::int64_t& out_ms) {
    // Accepts T#<n><unit>... with units d, h, m, s, ms in descending order.
    if (text.size() < 3) return false;
    if ((text[0] != 'T' && text[0] != 't') || text[1] != '#') return false;
    std::size_t pos = 2;
    std::int64_t total = 0;
    bool any = false;
    while (pos < text.size()) {
        if (!std::isdigit(static_cast<unsigned char>(text[pos]))) return false;
        std::int64_t num = 0;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            num = num * 10 + (text[pos] - '0');
            ++pos;
        }
        std::string unit;
        while (pos < text.size() && std::isalpha(static_cast<unsigned char>(text[pos]))) {
            unit += static_cast<char>(std::tolower(static_cast<unsigned char>(text[pos])));
            ++pos;
            if (unit == "ms") break;
            if (unit.size() == 1 && pos < text.size() &&
                std::tolower(static_cast<unsigned char>(text[pos])) != 's') {
                break;
            }
        }
        std::int64_t scale;
        if (unit == "d") scale = 86'400'000;
        else if (unit == "h") scale = 3'600'000;
        else if (unit == "m") scale = 60'000;
        else if (unit == "s") scale = 1'000;
        else if (unit == "ms") scale = 1;
        else return false;
        total += num * scale;
        any = true;
    }
    if (!any) return false;
    out_ms = total;
    return true;
}

std::string time_to_text(std::int64_t ms) {
    return "T#" + std::to_string(ms) + "ms";
}

} // namespace stprio
