// skyjoin/value.hpp - nullable scalar cell used by tables and expressions
#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "skyjoin/errors.hpp"

namespace skyjoin {

enum class ColumnType { Int64, Float64, Text };

const char* column_type_name(ColumnType t);

class Value {
  public:
    Value() = default;  // null

    static Value null() { return Value(); }
    static Value of(std::int64_t v) { return Value(Repr(v)); }
    static Value of(double v) { return Value(Repr(v)); }
    static Value of(std::string v) { return Value(Repr(std::move(v))); }
    static Value of(bool v) { return Value(Repr(v)); }

    bool is_null() const { return std::holds_alternative<std::monostate>(v_); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
    bool is_real() const { return std::holds_alternative<double>(v_); }
    bool is_text() const { return std::holds_alternative<std::string>(v_); }
    bool is_bool() const { return std::holds_alternative<bool>(v_); }

    std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
    double as_real() const { return std::get<double>(v_); }
    const std::string& as_text() const { return std::get<std::string>(v_); }
    bool as_bool() const { return std::get<bool>(v_); }

    /// Int or real as double; throws std::bad_variant_access otherwise.
    double as_number() const {
        if (is_int()) return static_cast<double>(as_int());
        return as_real();
    }

    bool operator==(const Value& o) const { return v_ == o.v_; }

  private:
    using Repr = std::variant<std::monostate, std::int64_t, double, std::string, bool>;
    explicit Value(Repr v) : v_(std::move(v)) {}
    Repr v_;
};

/// Shortest decimal form that parses back to the same double ("inf", "-inf"
/// and "nan" for the non-finite values).
std::string format_double(double v);
std::string format_int(std::int64_t v);

/// Full-string strict parses; return false without touching *out on failure.
bool parse_double(const std::string& s, double* out);
bool parse_int(const std::string& s, std::int64_t* out);

}  // namespace skyjoin
