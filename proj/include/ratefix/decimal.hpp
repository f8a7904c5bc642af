#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace ratefix {

/// Fixed-point decimal with six fractional digits, stored as a scaled
/// integer. Used for every quoted rate so that trimmed means and their
/// published rounding are exact.
class Decimal {
public:
    static constexpr int kDigits = 6;
    static constexpr std::int64_t kScale = 1'000'000;

    constexpr Decimal() = default;

    static constexpr Decimal from_micros(std::int64_t micros) {
        Decimal d;
        d.micros_ = micros;
        return d;
    }

    /// Parses "-12.345678" style text. At most six fractional digits;
    /// throws Error(ParseError) otherwise.
    static Decimal parse(std::string_view text);

    /// Nearest representable value, ties rounded toward +infinity.
    /// Throws Error(NonFiniteValue) for NaN or infinity.
    static Decimal from_double(double value);

    /// Rounds the exact rational numerator/denominator to six digits, ties
    /// toward +infinity. denominator must be positive.
    static Decimal from_ratio(std::int64_t numerator_micros, std::int64_t denominator);

    constexpr std::int64_t micros() const { return micros_; }
    double to_double() const { return static_cast<double>(micros_) / kScale; }

    /// Half-up rounding to `places` fractional digits (places >= 6 is a no-op).
    Decimal rounded(int places) const;

    /// Fixed notation with exactly `places` digits (0..6); rounds half-up first.
    std::string to_string(int places = kDigits) const;

    friend constexpr Decimal operator+(Decimal a, Decimal b) { return from_micros(a.micros_ + b.micros_); }
    friend constexpr Decimal operator-(Decimal a, Decimal b) { return from_micros(a.micros_ - b.micros_); }
    constexpr Decimal operator-() const { return from_micros(-micros_); }
    constexpr Decimal& operator+=(Decimal o) { micros_ += o.micros_; return *this; }
    constexpr Decimal& operator-=(Decimal o) { micros_ -= o.micros_; return *this; }

    friend constexpr auto operator<=>(Decimal, Decimal) = default;
    friend constexpr bool operator==(Decimal, Decimal) = default;

private:
    std::int64_t micros_ = 0;
};

/// floor(numerator / denominator + 1/2) for denominator > 0.
std::int64_t round_half_up_div(std::int64_t numerator, std::int64_t denominator);

}  // namespace ratefix
