#include "ratefix/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include "parse_util.hpp"
#include "ratefix/error.hpp"
#include "ratefix/random.hpp"

namespace ratefix {

using detail::format_double;
using detail::parse_double;
using detail::split;

double BaseCurve::at(std::size_t day, std::size_t n_days) const {
    switch (kind) {
        case Kind::Constant:
            return level;
        case Kind::Linear:
            if (n_days <= 1) return level;
            return level + (end_level - level) * static_cast<double>(day - 1) / static_cast<double>(n_days - 1);
        case Kind::Shock:
            return day >= shock_day ? level + shock_size : level;
    }
    return level;
}

BaseCurve BaseCurve::parse(std::string_view spec) {
    const auto parts = split(spec, ':');
    BaseCurve c;
    if (parts[0] == "constant" && parts.size() == 2) {
        c.kind = Kind::Constant;
        c.level = parse_double(parts[1], "base level");
    } else if (parts[0] == "linear" && parts.size() == 3) {
        c.kind = Kind::Linear;
        c.level = parse_double(parts[1], "base start level");
        c.end_level = parse_double(parts[2], "base end level");
    } else if (parts[0] == "shock" && parts.size() == 4) {
        c.kind = Kind::Shock;
        c.level = parse_double(parts[1], "base level");
        c.shock_day = detail::parse_uint(parts[2], "shock day");
        c.shock_size = parse_double(parts[3], "shock size");
        if (c.shock_day < 1) throw Error(Errc::ParseError, "shock day is 1-based");
    } else {
        throw Error(Errc::ParseError, "invalid base curve '" + std::string(spec) +
                                          "' (constant:L | linear:L0:L1 | shock:L:DAY:SIZE)");
    }
    if (!std::isfinite(c.level) || !std::isfinite(c.end_level) || !std::isfinite(c.shock_size)) {
        throw Error(Errc::ParseError, "base curve values must be finite");
    }
    return c;
}

std::string BaseCurve::spec() const {
    switch (kind) {
        case Kind::Constant: return "constant:" + format_double(level);
        case Kind::Linear: return "linear:" + format_double(level) + ":" + format_double(end_level);
        case Kind::Shock:
            return "shock:" + format_double(level) + ":" + std::to_string(shock_day) + ":" + format_double(shock_size);
    }
    return {};
}

QuoteLevel QuoteLevel::parse(std::string_view text) {
    QuoteLevel q;
    if (text.starts_with("base")) {
        q.relative_to_base = true;
        text.remove_prefix(4);
        if (text.empty()) return q;
        if (text.front() != '+' && text.front() != '-') {
            throw Error(Errc::ParseError, "expected base+X or base-X");
        }
    }
    q.value = parse_double(text, "rate level");
    if (!std::isfinite(q.value)) throw Error(Errc::ParseError, "rate level must be finite");
    return q;
}

namespace {

std::string level_spec(const QuoteLevel& q) {
    if (!q.relative_to_base) return format_double(q.value);
    return std::string("base") + (q.value < 0 ? "" : "+") + format_double(q.value);
}

std::optional<DayRange> parse_days(const std::vector<std::string_view>& parts, std::size_t index) {
    if (parts.size() <= index) return std::nullopt;
    const auto ends = split(parts[index], '-');
    if (ends.size() == 1) {
        const std::size_t d = detail::parse_uint(ends[0], "day");
        if (d < 1) throw Error(Errc::ParseError, "days are 1-based");
        return DayRange{d, d};
    }
    if (ends.size() != 2) throw Error(Errc::ParseError, "invalid day range '" + std::string(parts[index]) + "'");
    const DayRange r{detail::parse_uint(ends[0], "day"), detail::parse_uint(ends[1], "day")};
    if (r.first < 1 || r.last < r.first) {
        throw Error(Errc::ParseError, "day range '" + std::string(parts[index]) + "' must be 1-based and ascending");
    }
    return r;
}

std::string days_spec(const std::optional<DayRange>& days) {
    if (!days) return {};
    return ":" + std::to_string(days->first) + "-" + std::to_string(days->last);
}

}  // namespace

Strategy parse_strategy(std::string_view spec) {
    const auto parts = split(spec, ':');
    auto arity = [&](std::size_t lo, std::size_t hi) {
        if (parts.size() < lo || parts.size() > hi) {
            throw Error(Errc::ParseError, "invalid strategy '" + std::string(spec) + "'");
        }
    };
    auto bank = [&](std::string_view b) {
        if (b.empty()) throw Error(Errc::ParseError, "empty bank name in '" + std::string(spec) + "'");
        return std::string(b);
    };
    if (parts[0] == "single-offset") {
        arity(3, 4);
        return SingleOffset{bank(parts[1]), parse_double(parts[2], "offset"), parse_days(parts, 3)};
    }
    if (parts[0] == "single-fixed") {
        arity(3, 4);
        return SingleFixed{bank(parts[1]), QuoteLevel::parse(parts[2]), parse_days(parts, 3)};
    }
    if (parts[0] == "collusive") {
        arity(3, 4);
        std::vector<std::string> banks;
        for (auto b : split(parts[1], '+')) banks.push_back(bank(b));
        return CollusiveQuote{std::move(banks), QuoteLevel::parse(parts[2]), parse_days(parts, 3)};
    }
    throw Error(Errc::ParseError, "unknown strategy kind in '" + std::string(spec) +
                                      "' (single-offset | single-fixed | collusive)");
}

std::string strategy_spec(const Strategy& strategy) {
    struct Visitor {
        std::string operator()(const SingleOffset& s) const {
            return "single-offset:" + s.bank + ":" + format_double(s.offset) + days_spec(s.days);
        }
        std::string operator()(const SingleFixed& s) const {
            return "single-fixed:" + s.bank + ":" + level_spec(s.rate) + days_spec(s.days);
        }
        std::string operator()(const CollusiveQuote& s) const {
            std::string banks;
            for (const auto& b : s.banks) banks += (banks.empty() ? "" : "+") + b;
            return "collusive:" + banks + ":" + level_spec(s.rate) + days_spec(s.days);
        }
    };
    return std::visit(Visitor{}, strategy);
}

void ScenarioConfig::validate() const {
    if (n_banks < 3) throw Error(Errc::InvalidConfig, "scenario needs at least 3 banks");
    if (n_days < 1) throw Error(Errc::InvalidConfig, "scenario needs at least 1 day");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw Error(Errc::InvalidConfig, "noise_sigma must be finite and >= 0");
    }
    if (!bank_bias.empty() && bank_bias.size() != n_banks) {
        throw Error(Errc::InvalidConfig, "bank_bias must be empty or have one entry per bank");
    }
    if (!bank_names.empty() && bank_names.size() != n_banks) {
        throw Error(Errc::InvalidConfig, "bank_names must be empty or have one entry per bank");
    }
    const auto names = resolved_bank_names();
    if (std::set<std::string>(names.begin(), names.end()).size() != names.size()) {
        throw Error(Errc::InvalidConfig, "bank names must be unique");
    }
    if (!start_date.ok()) throw Error(Errc::InvalidConfig, "invalid start date");
}

std::vector<std::string> ScenarioConfig::resolved_bank_names() const {
    if (!bank_names.empty()) return bank_names;
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= n_banks; ++i) names.push_back("BANK" + std::to_string(i));
    return names;
}

std::size_t GeneratedPanel::manipulated_count() const {
    return static_cast<std::size_t>(std::count(manipulated.begin(), manipulated.end(), true));
}

std::vector<Date> weekday_dates(Date start, std::size_t count) {
    using namespace std::chrono;
    std::vector<Date> out;
    out.reserve(count);
    sys_days day{start};
    while (out.size() < count) {
        const weekday wd{day};
        if (wd != Saturday && wd != Sunday) out.emplace_back(day);
        day += days{1};
    }
    return out;
}

GeneratedPanel generate(const ScenarioConfig& config) {
    config.validate();
    const std::size_t nb = config.n_banks;
    const std::size_t nd = config.n_days;

    GeneratedPanel panel;
    panel.banks = config.resolved_bank_names();
    panel.dates = weekday_dates(config.start_date, nd);
    panel.manipulated.assign(nb * nd, false);

    auto bank_index = [&](const std::string& name) {
        auto it = std::find(panel.banks.begin(), panel.banks.end(), name);
        if (it == panel.banks.end()) {
            throw Error(Errc::InvalidStrategyTarget, "strategy targets unknown bank '" + name + "'");
        }
        return static_cast<std::size_t>(it - panel.banks.begin());
    };
    auto day_span = [&](const std::optional<DayRange>& days) {
        const DayRange r = days.value_or(DayRange{1, nd});
        if (r.first < 1 || r.last > nd || r.first > r.last) {
            throw Error(Errc::InvalidStrategyTarget, "strategy day range " + std::to_string(r.first) + "-" +
                                                         std::to_string(r.last) + " outside [1, " +
                                                         std::to_string(nd) + "]");
        }
        return r;
    };
    auto clamp0 = [](Decimal d) { return std::max(d, Decimal::from_micros(0)); };

    std::vector<Decimal> rates(nb * nd);
    for (std::size_t b = 0; b < nb; ++b) {
        const double bias = config.bank_bias.empty() ? 0.0 : config.bank_bias[b];
        for (std::size_t t = 0; t < nd; ++t) {
            double value = config.base.at(t + 1, nd) + bias;
            if (config.noise_sigma > 0.0) {
                SplitMix64 rng = cell_stream(config.seed, b, t);
                value += config.noise_sigma * rng.normal();
            }
            rates[b * nd + t] = Decimal::from_double(std::max(value, 0.0));
        }
    }

    auto overwrite = [&](std::size_t b, const DayRange& r, auto&& rate_for_day) {
        for (std::size_t day = r.first; day <= r.last; ++day) {
            const std::size_t cell = b * nd + (day - 1);
            rates[cell] = clamp0(rate_for_day(day, rates[cell]));
            panel.manipulated[cell] = true;
        }
    };
    for (const Strategy& strategy : config.strategies) {
        if (const auto* s = std::get_if<SingleOffset>(&strategy)) {
            const Decimal offset = Decimal::from_double(s->offset);
            overwrite(bank_index(s->bank), day_span(s->days), [&](std::size_t, Decimal honest) { return honest + offset; });
        } else if (const auto* s = std::get_if<SingleFixed>(&strategy)) {
            overwrite(bank_index(s->bank), day_span(s->days), [&](std::size_t day, Decimal) {
                return Decimal::from_double(s->rate.resolve(config.base.at(day, nd)));
            });
        } else if (const auto* s = std::get_if<CollusiveQuote>(&strategy)) {
            if (s->banks.empty()) throw Error(Errc::InvalidStrategyTarget, "collusive strategy names no banks");
            const DayRange r = day_span(s->days);
            for (const auto& name : s->banks) {
                overwrite(bank_index(name), r, [&](std::size_t day, Decimal) {
                    return Decimal::from_double(s->rate.resolve(config.base.at(day, nd)));
                });
            }
        }
    }

    panel.submissions.reserve(nb * nd);
    for (std::size_t b = 0; b < nb; ++b) {
        for (std::size_t t = 0; t < nd; ++t) {
            panel.submissions.push_back(Submission{BankId(panel.banks[b]), panel.dates[t], config.tenor, rates[b * nd + t]});
        }
    }
    return panel;
}

void write_truth_csv(std::ostream& out, const GeneratedPanel& panel) {
    // Same row order as write_submissions_csv: date, then bank.
    std::vector<std::size_t> order(panel.banks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return panel.banks[a] < panel.banks[b]; });
    out << "date,bank,manipulated\n";
    for (std::size_t t = 0; t < panel.dates.size(); ++t) {
        for (std::size_t b : order) {
            out << format_date(panel.dates[t]) << ',' << panel.banks[b] << ',' << (panel.is_manipulated(b, t) ? 1 : 0)
                << '\n';
        }
    }
}

FixingSeries fixing_series(std::span<const Submission> submissions, Tenor tenor, const FixingConfig& config) {
    std::map<Date, std::vector<Decimal>> by_date;
    for (const Submission& s : submissions) {
        if (s.tenor == tenor) by_date[s.date].push_back(s.rate);
    }
    FixingSeries series;
    for (const auto& [date, quotes] : by_date) {
        try {
            series.fixings.push_back(DatedFixing{date, compute_fixing(quotes, config)});
        } catch (const Error& e) {
            series.failures.push_back(FixingFailure{date, e.what()});
        }
    }
    return series;
}

}  // namespace ratefix
