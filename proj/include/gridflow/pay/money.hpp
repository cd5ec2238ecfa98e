#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "gridflow/errors.hpp"

namespace gridflow::pay {

/// Exact decimal amount with six fractional digits, stored as integer
/// micro-units. Addition and subtraction are exact; conversions from binary
/// floating point round to the nearest micro-unit.
class Money {
public:
    static constexpr std::int64_t kScale = 1'000'000;

    constexpr Money() = default;

    static constexpr Money from_micros(std::int64_t micros) {
        Money m;
        m.micros_ = micros;
        return m;
    }
    static Money from_units(std::int64_t units);
    static Money from_double(double value);
    static Money parse(std::string_view text);

    std::int64_t micros() const { return micros_; }
    double to_double() const { return static_cast<double>(micros_) / kScale; }
    bool is_zero() const { return micros_ == 0; }
    bool is_negative() const { return micros_ < 0; }

    /// Canonical decimal rendering: no exponent, trailing fractional zeros
    /// trimmed, "0" for zero. parse(str()) round-trips exactly.
    std::string str() const;

    Money operator-() const { return from_micros(-micros_); }
    Money& operator+=(Money rhs);
    Money& operator-=(Money rhs);
    friend Money operator+(Money a, Money b) { return a += b; }
    friend Money operator-(Money a, Money b) { return a -= b; }
    auto operator<=>(const Money&) const = default;

    /// Nearest-micro product with a dimensionless factor (e.g. price times
    /// measured energy). Deterministic half-away-from-zero rounding.
    Money scaled_by(double factor) const;

private:
    std::int64_t micros_ = 0;
};

}  // namespace gridflow::pay
