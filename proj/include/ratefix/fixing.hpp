#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ratefix/decimal.hpp"

namespace ratefix {

struct FixingConfig {
    // Share of quotes removed from each tail; must lie in [0, 0.5).
    double trim_fraction = 0.25;
    // Decimal places of the published rate.
    int publish_precision = 3;
    // Quotes that must survive trimming.
    std::size_t min_retained = 1;

    void validate() const;
    std::size_t trim_count(std::size_t n) const;
};

struct FixingResult {
    Decimal raw_mean;   // exact mean rounded half-up at six digits
    Decimal published;  // exact mean rounded half-up at publish_precision
    std::vector<Decimal> retained;
    std::vector<Decimal> trimmed_low;
    std::vector<Decimal> trimmed_high;
};

/// Trimmed-mean fixing: sort, drop floor(trim_fraction * n) quotes from each
/// end (equal values leave in input order), average the rest.
FixingResult compute_fixing(std::span<const Decimal> quotes, const FixingConfig& config = {});

/// Converts floating-point quotes, rejecting NaN/inf with Errc::NonFiniteQuote.
std::vector<Decimal> quotes_from_doubles(std::span<const double> quotes);

/// raw_mean after replacing quotes[bank_index] by new_rate, minus the
/// original raw_mean.
Decimal single_bank_impact(std::span<const Decimal> quotes, std::size_t bank_index, Decimal new_rate,
                           const FixingConfig& config = {});

/// The fixing as a function of one bank's quote x, holding the others fixed:
///   fixing(x) = (others_sum + clamp(x, lower_clip, upper_clip)) / retained_count
/// The clips are the order statistics of the other quotes that bound the
/// retained band; an untrimmed panel has no clip.
struct QuoteResponse {
    std::int64_t others_sum_micros = 0;
    std::size_t retained_count = 0;
    bool has_clips = false;
    Decimal lower_clip;
    Decimal upper_clip;

    Decimal fixing_at(Decimal quote) const;
};

QuoteResponse quote_response(std::span<const Decimal> quotes, std::size_t bank_index,
                             const FixingConfig& config = {});

struct InfluenceEnvelope {
    Decimal min_fixing;
    Decimal max_fixing;
};

/// Range of raw_mean reachable by moving one bank's quote within [lo, hi].
InfluenceEnvelope influence_envelope(std::span<const Decimal> quotes, std::size_t bank_index,
                                     const FixingConfig& config, Decimal lo, Decimal hi);

}  // namespace ratefix
