#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ratefix {

/// SplitMix64 (Steele, Lea & Flood). Fully specified integer arithmetic, so
/// streams are identical on every platform.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

    constexpr std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in (0, 1], 53-bit resolution.
    double uniform_open0() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (one variate per call).
    double normal() {
        const double u1 = uniform_open0();
        const double u2 = uniform_open0();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

/// Independent stream for one (bank, day) cell: the cell's draws never
/// depend on how many other cells or strategies exist.
inline SplitMix64 cell_stream(std::uint64_t seed, std::uint64_t bank, std::uint64_t day) {
    SplitMix64 mix(seed);
    const std::uint64_t base = mix.next();
    SplitMix64 bank_mix(base ^ (bank * 0xD1B54A32D192ED03ULL));
    const std::uint64_t bank_key = bank_mix.next();
    SplitMix64 day_mix(bank_key ^ (day * 0x8CB92BA72F3D8DD7ULL));
    return SplitMix64(day_mix.next());
}

}  // namespace ratefix
