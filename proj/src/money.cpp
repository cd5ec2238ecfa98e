#include "gridflow/pay/money.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace gridflow::pay {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t out;
    if (__builtin_add_overflow(a, b, &out)) throw Error("money overflow");
    return out;
}

}  // namespace

Money Money::from_units(std::int64_t units) {
    std::int64_t micros;
    if (__builtin_mul_overflow(units, kScale, &micros)) throw Error("money overflow");
    return from_micros(micros);
}

Money Money::from_double(double value) {
    if (!std::isfinite(value)) throw Error("money from non-finite value");
    const double scaled = value * static_cast<double>(kScale);
    if (std::abs(scaled) > 9.2e18) throw Error("money overflow");
    return from_micros(static_cast<std::int64_t>(std::llround(scaled)));
}

Money Money::parse(std::string_view text) {
    if (text.empty()) throw Error("empty money literal");
    size_t pos = 0;
    bool negative = false;
    if (text[pos] == '+' || text[pos] == '-') {
        negative = text[pos] == '-';
        ++pos;
    }
    std::int64_t units = 0;
    size_t digits = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        ++digits;
        if (__builtin_mul_overflow(units, 10, &units)) throw Error("money overflow");
        units = checked_add(units, text[pos] - '0');
        ++pos;
    }
    std::int64_t frac = 0;
    size_t frac_digits = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            if (frac_digits < 6) {
                frac = frac * 10 + (text[pos] - '0');
                ++frac_digits;
            } else if (text[pos] != '0') {
                throw Error("money literal has more than 6 fractional digits: " +
                            std::string(text));
            }
            ++pos;
        }
        if (frac_digits == 0) throw Error("money literal ends with bare decimal point");
    }
    if (digits == 0 && frac_digits == 0) throw Error("bad money literal: " + std::string(text));
    if (pos != text.size()) throw Error("bad money literal: " + std::string(text));
    for (size_t i = frac_digits; i < 6; ++i) frac *= 10;
    std::int64_t micros;
    if (__builtin_mul_overflow(units, kScale, &micros)) throw Error("money overflow");
    micros = checked_add(micros, frac);
    return from_micros(negative ? -micros : micros);
}

std::string Money::str() const {
    const bool negative = micros_ < 0;
    // careful with INT64_MIN: split before negating
    std::uint64_t mag = negative ? 0 - static_cast<std::uint64_t>(micros_)
                                 : static_cast<std::uint64_t>(micros_);
    std::uint64_t units = mag / kScale;
    std::uint64_t frac = mag % kScale;
    std::string out = negative ? "-" : "";
    out += std::to_string(units);
    if (frac != 0) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "%06llu", static_cast<unsigned long long>(frac));
        std::string f(buf);
        while (f.back() == '0') f.pop_back();
        out += "." + f;
    }
    return out;
}

Money& Money::operator+=(Money rhs) {
    micros_ = checked_add(micros_, rhs.micros_);
    return *this;
}

Money& Money::operator-=(Money rhs) {
    if (rhs.micros_ == INT64_MIN) throw Error("money overflow");
    micros_ = checked_add(micros_, -rhs.micros_);
    return *this;
}

Money Money::scaled_by(double factor) const {
    if (!std::isfinite(factor)) throw Error("money scaled by non-finite factor");
    const double scaled = static_cast<double>(micros_) * factor;
    if (std::abs(scaled) > 9.2e18) throw Error("money overflow");
    return from_micros(static_cast<std::int64_t>(std::llround(scaled)));
}

}  // namespace gridflow::pay
