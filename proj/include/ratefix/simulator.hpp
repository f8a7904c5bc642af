#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ratefix/fixing.hpp"
#include "ratefix/panel.hpp"

namespace ratefix {

/// Common rate level over the scenario, day index 1..n_days.
struct BaseCurve {
    enum class Kind { Constant, Linear, Shock };
    Kind kind = Kind::Constant;
    double level = 3.0;      // constant level, linear start, or pre-shock level
    double end_level = 3.0;  // linear: level on the last day
    std::size_t shock_day = 1;  // shock: first day of the new level
    double shock_size = 0.0;

    double at(std::size_t day, std::size_t n_days) const;

    /// "constant:3.0" | "linear:3.0:2.5" | "shock:3.0:120:-0.5"
    static BaseCurve parse(std::string_view spec);
    std::string spec() const;
};

/// Either an absolute rate or an offset from the day's base level.
struct QuoteLevel {
    bool relative_to_base = false;
    double value = 0.0;

    double resolve(double base) const { return relative_to_base ? base + value : value; }
    /// "3.0" | "base-0.05" | "base+0.1"
    static QuoteLevel parse(std::string_view text);
};

/// Inclusive 1-based day range.
struct DayRange {
    std::size_t first = 1;
    std::size_t last = 1;
};

struct SingleOffset {
    std::string bank;
    double offset = 0.0;
    std::optional<DayRange> days;  // all days when empty
};

struct SingleFixed {
    std::string bank;
    QuoteLevel rate;
    std::optional<DayRange> days;
};

struct CollusiveQuote {
    std::vector<std::string> banks;
    QuoteLevel rate;
    std::optional<DayRange> days;
};

using Strategy = std::variant<SingleOffset, SingleFixed, CollusiveQuote>;

/// Mini-grammar, day range optional:
///   single-offset:BANK3:0.10:1-250
///   single-fixed:BANK9:3.0:10-20
///   collusive:BANK1+BANK2+BANK3:base-0.05:1-250
Strategy parse_strategy(std::string_view spec);
std::string strategy_spec(const Strategy& strategy);

struct ScenarioConfig {
    std::size_t n_banks = 12;
    std::size_t n_days = 250;
    BaseCurve base;
    double noise_sigma = 0.01;
    std::uint64_t seed = 1;
    std::vector<Strategy> strategies;
    // Optional per-bank constant added to the base curve (size 0 or n_banks).
    std::vector<double> bank_bias;
    // Optional names (size 0 or n_banks); defaults to BANK1..BANKn.
    std::vector<std::string> bank_names;
    Tenor tenor = Tenor::Month1;
    Date start_date = std::chrono::year{2008} / std::chrono::January / 2;

    void validate() const;
    std::vector<std::string> resolved_bank_names() const;
};

struct GeneratedPanel {
    std::vector<std::string> banks;  // scenario order
    std::vector<Date> dates;
    std::vector<Submission> submissions;  // bank-major, day order
    std::vector<bool> manipulated;        // banks x days, row-major

    bool is_manipulated(std::size_t bank, std::size_t day) const {
        return manipulated[bank * dates.size() + day];
    }
    std::size_t manipulated_count() const;
};

/// honest(b, t) = base(t) + bias(b) + sigma * N(0,1) from the (seed, b, t)
/// stream, clamped at 0 and rounded to six digits; strategies then overwrite
/// their cells in declaration order.
GeneratedPanel generate(const ScenarioConfig& config);

/// Consecutive weekdays starting at `start` (moved forward off a weekend).
std::vector<Date> weekday_dates(Date start, std::size_t count);

void write_truth_csv(std::ostream& out, const GeneratedPanel& panel);

struct DatedFixing {
    Date date;
    FixingResult result;
};

struct FixingFailure {
    Date date;
    std::string message;
};

struct FixingSeries {
    std::vector<DatedFixing> fixings;  // date order
    std::vector<FixingFailure> failures;
};

/// One fixing per date for the given tenor. Dates that fail are collected in
/// `failures` instead of aborting the series.
FixingSeries fixing_series(std::span<const Submission> submissions, Tenor tenor, const FixingConfig& config = {});

}  // namespace ratefix
