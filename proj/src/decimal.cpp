#include "ratefix/decimal.hpp"

#include <cmath>
#include <cstdlib>

#include "ratefix/error.hpp"

namespace ratefix {

namespace {

constexpr std::int64_t kPow10[] = {1, 10, 100, 1000, 10000, 100000, 1000000};

__extension__ using Wide = __int128;

// Keeps |micros| well inside int64 so sums over large panels cannot overflow.
constexpr std::int64_t kMaxMicros = 1'000'000'000'000'000;  // 1e12 percent

}  // namespace

std::int64_t round_half_up_div(std::int64_t numerator, std::int64_t denominator) {
    if (denominator <= 0) {
        throw Error(Errc::InvalidArgument, "round_half_up_div: denominator must be positive");
    }
    const Wide num = static_cast<Wide>(numerator) * 2 + denominator;
    const Wide den = static_cast<Wide>(denominator) * 2;
    Wide q = num / den;
    if ((num % den != 0) && (num < 0)) --q;  // floor for negatives
    return static_cast<std::int64_t>(q);
}

Decimal Decimal::parse(std::string_view text) {
    auto fail = [&](const char* why) {
        return Error(Errc::ParseError, "invalid decimal '" + std::string(text) + "': " + why);
    };
    std::size_t pos = 0;
    bool negative = false;
    if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
        negative = text[pos] == '-';
        ++pos;
    }
    std::int64_t whole = 0;
    std::size_t int_digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
        whole = whole * 10 + (text[pos] - '0');
        if (whole > kMaxMicros / kScale) throw fail("out of range");
        ++pos;
        ++int_digits;
    }
    std::int64_t frac = 0;
    std::size_t frac_digits = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            if (frac_digits == kDigits) throw fail("more than 6 fractional digits");
            frac = frac * 10 + (text[pos] - '0');
            ++pos;
            ++frac_digits;
        }
    }
    if (pos != text.size()) throw fail("unexpected character");
    if (int_digits + frac_digits == 0) throw fail("no digits");
    std::int64_t micros = whole * kScale + frac * kPow10[kDigits - frac_digits];
    return from_micros(negative ? -micros : micros);
}

Decimal Decimal::from_double(double value) {
    if (!std::isfinite(value)) {
        throw Error(Errc::NonFiniteValue, "non-finite value cannot be represented as a decimal");
    }
    const double scaled = std::floor(value * static_cast<double>(kScale) + 0.5);
    if (std::fabs(scaled) > static_cast<double>(kMaxMicros)) {
        throw Error(Errc::InvalidArgument, "value out of decimal range");
    }
    return from_micros(static_cast<std::int64_t>(scaled));
}

Decimal Decimal::from_ratio(std::int64_t numerator_micros, std::int64_t denominator) {
    return from_micros(round_half_up_div(numerator_micros, denominator));
}

Decimal Decimal::rounded(int places) const {
    if (places >= kDigits) return *this;
    if (places < 0) throw Error(Errc::InvalidArgument, "negative rounding precision");
    const std::int64_t unit = kPow10[kDigits - places];
    return from_micros(round_half_up_div(micros_, unit) * unit);
}

std::string Decimal::to_string(int places) const {
    if (places > kDigits) places = kDigits;
    const Decimal r = rounded(places);
    const std::int64_t mag = std::llabs(r.micros_);
    std::string out = (r.micros_ < 0) ? "-" : "";
    out += std::to_string(mag / kScale);
    if (places > 0) {
        std::string frac = std::to_string(mag % kScale);
        frac.insert(0, kDigits - frac.size(), '0');
        out += '.';
        out += frac.substr(0, static_cast<std::size_t>(places));
    }
    return out;
}

}  // namespace ratefix
