#include "ratefix/fixing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ratefix/error.hpp"

namespace ratefix {

void FixingConfig::validate() const {
    if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
        throw Error(Errc::InvalidConfig, "trim_fraction must lie in [0, 0.5)");
    }
    if (publish_precision < 0) throw Error(Errc::InvalidConfig, "publish_precision must be >= 0");
    if (min_retained < 1) throw Error(Errc::InvalidConfig, "min_retained must be >= 1");
}

std::size_t FixingConfig::trim_count(std::size_t n) const {
    // The epsilon absorbs products such as 0.29 * 100 = 28.999999999999996.
    return static_cast<std::size_t>(std::floor(trim_fraction * static_cast<double>(n) + 1e-9));
}

namespace {

std::size_t checked_trim(std::size_t n, const FixingConfig& config) {
    config.validate();
    if (n == 0) throw Error(Errc::EmptyAfterTrim, "no quotes supplied");
    const std::size_t trim = config.trim_count(n);
    if (n < 2 * trim + config.min_retained) {
        throw Error(Errc::EmptyAfterTrim, "trimming " + std::to_string(trim) + " per side from " +
                                              std::to_string(n) + " quotes leaves fewer than " +
                                              std::to_string(config.min_retained));
    }
    return trim;
}

}  // namespace

FixingResult compute_fixing(std::span<const Decimal> quotes, const FixingConfig& config) {
    const std::size_t n = quotes.size();
    const std::size_t trim = checked_trim(n, config);

    std::vector<Decimal> sorted(quotes.begin(), quotes.end());
    std::stable_sort(sorted.begin(), sorted.end());

    FixingResult result;
    result.trimmed_low.assign(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(trim));
    result.retained.assign(sorted.begin() + static_cast<std::ptrdiff_t>(trim),
                           sorted.end() - static_cast<std::ptrdiff_t>(trim));
    result.trimmed_high.assign(sorted.end() - static_cast<std::ptrdiff_t>(trim), sorted.end());

    std::int64_t sum = 0;
    for (Decimal q : result.retained) sum += q.micros();
    const auto count = static_cast<std::int64_t>(result.retained.size());
    result.raw_mean = Decimal::from_ratio(sum, count);
    if (config.publish_precision >= Decimal::kDigits) {
        result.published = result.raw_mean;
    } else {
        // Round the exact mean, not raw_mean, so there is no double rounding.
        const std::int64_t unit = [&] {
            std::int64_t u = 1;
            for (int i = config.publish_precision; i < Decimal::kDigits; ++i) u *= 10;
            return u;
        }();
        result.published = Decimal::from_micros(round_half_up_div(sum, count * unit) * unit);
    }
    return result;
}

std::vector<Decimal> quotes_from_doubles(std::span<const double> quotes) {
    std::vector<Decimal> out;
    out.reserve(quotes.size());
    for (double q : quotes) {
        if (!std::isfinite(q)) throw Error(Errc::NonFiniteQuote, "quote is not finite");
        out.push_back(Decimal::from_double(q));
    }
    return out;
}

Decimal single_bank_impact(std::span<const Decimal> quotes, std::size_t bank_index, Decimal new_rate,
                           const FixingConfig& config) {
    if (bank_index >= quotes.size()) throw Error(Errc::InvalidArgument, "bank index out of range");
    std::vector<Decimal> changed(quotes.begin(), quotes.end());
    changed[bank_index] = new_rate;
    return compute_fixing(changed, config).raw_mean - compute_fixing(quotes, config).raw_mean;
}

Decimal QuoteResponse::fixing_at(Decimal quote) const {
    const Decimal effective = has_clips ? std::clamp(quote, lower_clip, upper_clip) : quote;
    return Decimal::from_ratio(others_sum_micros + effective.micros(),
                               static_cast<std::int64_t>(retained_count));
}

QuoteResponse quote_response(std::span<const Decimal> quotes, std::size_t bank_index,
                             const FixingConfig& config) {
    if (bank_index >= quotes.size()) throw Error(Errc::InvalidArgument, "bank index out of range");
    const std::size_t n = quotes.size();
    const std::size_t trim = checked_trim(n, config);

    std::vector<Decimal> others;
    others.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (i != bank_index) others.push_back(quotes[i]);
    }
    std::sort(others.begin(), others.end());

    // With the attacker's quote x inserted, the retained band always holds
    // others[trim .. n-2-trim] plus one more value: others[trim-1] if x sits
    // below it, others[n-1-trim] if x sits above it, and x itself otherwise.
    QuoteResponse r;
    r.retained_count = n - 2 * trim;
    for (std::size_t i = trim; i + trim + 1 < n; ++i) r.others_sum_micros += others[i].micros();
    if (trim > 0) {
        r.has_clips = true;
        r.lower_clip = others[trim - 1];
        r.upper_clip = others[n - 1 - trim];
    }
    return r;
}

InfluenceEnvelope influence_envelope(std::span<const Decimal> quotes, std::size_t bank_index,
                                     const FixingConfig& config, Decimal lo, Decimal hi) {
    if (hi < lo) throw Error(Errc::InvalidArgument, "rate bounds must satisfy lo <= hi");
    const QuoteResponse r = quote_response(quotes, bank_index, config);
    // fixing_at is non-decreasing in the quote, so the endpoints are extremal.
    return InfluenceEnvelope{r.fixing_at(lo), r.fixing_at(hi)};
}

}  // namespace ratefix
