#include "ratefix/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "ratefix/error.hpp"

namespace ratefix {

namespace {

int parse_fixed_int(std::string_view text, std::string_view whole) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error(Errc::ParseError, "invalid date '" + std::string(whole) + "'");
    }
    return value;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Minimal RFC 4180 field splitter: handles quoted fields with doubled quotes.
std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

bool in_range(Date d, DateRange range) { return d >= range.first && d <= range.last; }

}  // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw Error(Errc::ParseError, "invalid date '" + std::string(text) + "': expected YYYY-MM-DD");
    }
    const int y = parse_fixed_int(text.substr(0, 4), text);
    const int m = parse_fixed_int(text.substr(5, 2), text);
    const int d = parse_fixed_int(text.substr(8, 2), text);
    const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) throw Error(Errc::ParseError, "invalid calendar date '" + std::string(text) + "'");
    return date;
}

std::string format_date(Date date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

BankId::BankId(std::string label) : label_(std::move(label)) {
    if (label_.empty()) throw Error(Errc::InvalidArgument, "bank id must be non-empty");
}

Tenor parse_tenor(std::string_view code) {
    if (code == "O/N") return Tenor::Overnight;
    if (code == "1W") return Tenor::Week1;
    if (code == "1M") return Tenor::Month1;
    if (code == "3M") return Tenor::Month3;
    if (code == "6M") return Tenor::Month6;
    if (code == "12M") return Tenor::Month12;
    throw Error(Errc::ParseError, "unknown tenor '" + std::string(code) + "'");
}

std::string_view tenor_code(Tenor tenor) {
    switch (tenor) {
        case Tenor::Overnight: return "O/N";
        case Tenor::Week1: return "1W";
        case Tenor::Month1: return "1M";
        case Tenor::Month3: return "3M";
        case Tenor::Month6: return "6M";
        case Tenor::Month12: return "12M";
    }
    return "?";
}

PanelWindow::PanelWindow(std::vector<BankId> banks, std::vector<Date> dates,
                         std::vector<Decimal> rates, Tenor tenor, std::string label)
    : banks_(std::move(banks)),
      dates_(std::move(dates)),
      rates_(std::move(rates)),
      tenor_(tenor),
      label_(std::move(label)) {
    if (banks_.size() < 2) throw Error(Errc::TooFewBanks, "panel window needs at least 2 banks");
    if (dates_.empty()) throw Error(Errc::EmptyWindow, "panel window needs at least 1 date");
    if (rates_.size() != banks_.size() * dates_.size()) {
        throw Error(Errc::InvalidArgument, "rate matrix size does not match banks x dates");
    }
    for (std::size_t i = 1; i < dates_.size(); ++i) {
        if (!(dates_[i - 1] < dates_[i])) {
            throw Error(Errc::InvalidArgument, "window dates must be strictly increasing");
        }
    }
    std::set<BankId> unique(banks_.begin(), banks_.end());
    if (unique.size() != banks_.size()) throw Error(Errc::InvalidArgument, "duplicate bank in window");
}

std::span<const Decimal> PanelWindow::row(std::size_t bank) const {
    return std::span<const Decimal>(rates_).subspan(bank * dates_.size(), dates_.size());
}

std::vector<double> PanelWindow::row_values(std::size_t bank) const {
    std::vector<double> out;
    out.reserve(dates_.size());
    for (Decimal d : row(bank)) out.push_back(d.to_double());
    return out;
}

std::vector<Submission> PanelWindow::to_submissions() const {
    std::vector<Submission> out;
    out.reserve(rates_.size());
    for (std::size_t b = 0; b < banks_.size(); ++b) {
        for (std::size_t t = 0; t < dates_.size(); ++t) {
            out.push_back(Submission{banks_[b], dates_[t], tenor_, rate(b, t)});
        }
    }
    return out;
}

PanelWindow build_window(std::span<const Submission> submissions, Tenor tenor, DateRange range,
                         const WindowPolicy& policy, std::string label, Warnings* warnings) {
    if (submissions.empty()) throw Error(Errc::EmptyWindow, "no submissions supplied");
    if (range.last < range.first) throw Error(Errc::InvalidArgument, "date range start is after end");
    if (!(policy.min_coverage >= 0.0 && policy.min_coverage <= 1.0)) {
        throw Error(Errc::InvalidConfig, "min_coverage must lie in [0, 1]");
    }
    if (policy.max_gap < 0) throw Error(Errc::InvalidConfig, "max_gap must be non-negative");
    auto warn = [&](std::string msg) {
        if (warnings) warnings->push_back(std::move(msg));
    };

    // bank -> date -> rate, ordered so output ordering never depends on input order
    std::map<BankId, std::map<Date, Decimal>> cells;
    for (const Submission& s : submissions) {
        if (s.tenor != tenor || !in_range(s.date, range)) continue;
        auto [it, inserted] = cells[s.bank].emplace(s.date, s.rate);
        if (!inserted) {
            throw Error(Errc::DuplicateSubmission, "duplicate submission for " + s.bank.str() + " on " +
                                                       format_date(s.date) + " (" +
                                                       std::string(tenor_code(tenor)) + ")");
        }
    }
    auto collect_dates = [&] {
        std::set<Date> dates;
        for (const auto& [bank, row] : cells) {
            for (const auto& [date, rate] : row) dates.insert(date);
        }
        return dates;
    };
    if (cells.empty()) throw Error(Errc::EmptyWindow, "no submissions for the requested tenor and range");

    const std::set<Date> candidates = collect_dates();
    for (auto it = cells.begin(); it != cells.end();) {
        const double coverage = static_cast<double>(it->second.size()) / static_cast<double>(candidates.size());
        if (coverage + 1e-12 < policy.min_coverage) {
            warn("dropping bank " + it->first.str() + ": coverage " + std::to_string(coverage) +
                 " below " + std::to_string(policy.min_coverage));
            it = cells.erase(it);
        } else {
            ++it;
        }
    }
    if (cells.size() < 2) {
        throw Error(Errc::TooFewBanks, "fewer than 2 banks meet the coverage requirement");
    }

    const std::set<Date> date_set = collect_dates();
    const std::vector<Date> all_dates(date_set.begin(), date_set.end());
    std::vector<BankId> banks;
    std::vector<std::vector<std::optional<Decimal>>> grid;
    for (const auto& [bank, row] : cells) {
        banks.push_back(bank);
        std::vector<std::optional<Decimal>> values(all_dates.size());
        for (std::size_t t = 0; t < all_dates.size(); ++t) {
            if (auto f = row.find(all_dates[t]); f != row.end()) values[t] = f->second;
        }
        if (policy.missing == MissingData::ForwardFill) {
            std::optional<Decimal> last;
            int run = 0;
            for (auto& v : values) {
                if (v) {
                    last = v;
                    run = 0;
                } else if (last && ++run <= policy.max_gap) {
                    v = last;
                }
            }
        }
        grid.push_back(std::move(values));
    }

    std::vector<std::size_t> kept;
    for (std::size_t t = 0; t < all_dates.size(); ++t) {
        const bool complete = std::all_of(grid.begin(), grid.end(), [&](const auto& r) { return r[t].has_value(); });
        if (complete) kept.push_back(t);
    }
    if (kept.empty()) throw Error(Errc::EmptyWindow, "no date survives the missing-data policy");
    if (kept.size() < all_dates.size()) {
        warn(std::to_string(all_dates.size() - kept.size()) + " incomplete date(s) removed");
    }

    std::vector<Date> dates;
    for (std::size_t t : kept) dates.push_back(all_dates[t]);
    std::vector<Decimal> rates;
    rates.reserve(banks.size() * kept.size());
    for (const auto& r : grid) {
        for (std::size_t t : kept) rates.push_back(*r[t]);
    }
    return PanelWindow(std::move(banks), std::move(dates), std::move(rates), tenor, std::move(label));
}

std::vector<PanelWindow> annual_windows(std::span<const Submission> submissions, Tenor tenor,
                                        int first_year, int last_year, const WindowPolicy& policy,
                                        std::string_view dataset, Warnings* warnings) {
    if (first_year > last_year) throw Error(Errc::InvalidArgument, "first year is after last year");
    using namespace std::chrono;
    std::vector<PanelWindow> windows;
    for (int y = first_year; y <= last_year; ++y) {
        const std::string label = std::string(dataset) + "-" + std::to_string(y);
        const DateRange range{year{y} / January / 1, year{y} / December / 31};
        try {
            windows.push_back(build_window(submissions, tenor, range, policy, label, warnings));
        } catch (const Error& e) {
            if (e.code() != Errc::EmptyWindow && e.code() != Errc::TooFewBanks) throw;
            if (warnings) warnings->push_back("skipping " + label + ": " + e.what());
        }
    }
    return windows;
}

std::optional<DateRange> date_span(std::span<const Submission> submissions, Tenor tenor) {
    std::optional<DateRange> out;
    for (const Submission& s : submissions) {
        if (s.tenor != tenor) continue;
        if (!out) {
            out = DateRange{s.date, s.date};
        } else {
            out->first = std::min(out->first, s.date);
            out->last = std::max(out->last, s.date);
        }
    }
    return out;
}

std::vector<Submission> read_submissions_csv(std::istream& in, const CsvOptions& options) {
    std::string line;
    if (!std::getline(in, line)) throw Error(Errc::ParseError, "line 1: missing header row");
    std::string_view header = trim(line);
    if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
    if (header != "date,bank,tenor,rate") {
        throw Error(Errc::ParseError, "line 1: header must be exactly 'date,bank,tenor,rate'");
    }

    std::vector<Submission> out;
    std::vector<std::string> errors;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(trim(line));
        try {
            if (fields.size() != 4) {
                throw Error(Errc::ParseError, "expected 4 fields, got " + std::to_string(fields.size()));
            }
            Submission s{BankId(std::string(trim(fields[1]))), parse_date(trim(fields[0])),
                         parse_tenor(trim(fields[2])), Decimal::parse(trim(fields[3]))};
            if (s.rate < options.rate_floor) {
                throw Error(Errc::ParseError, "rate " + s.rate.to_string() + " below floor " +
                                                  options.rate_floor.to_string());
            }
            out.push_back(std::move(s));
        } catch (const Error& e) {
            errors.push_back("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!errors.empty()) {
        std::ostringstream msg;
        msg << errors.size() << " malformed row(s)";
        for (std::size_t i = 0; i < errors.size() && i < 20; ++i) msg << "\n  " << errors[i];
        if (errors.size() > 20) msg << "\n  ...";
        throw Error(Errc::ParseError, msg.str());
    }
    return out;
}

void write_submissions_csv(std::ostream& out, std::span<const Submission> submissions) {
    std::vector<const Submission*> order;
    order.reserve(submissions.size());
    for (const Submission& s : submissions) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(), [](const Submission* a, const Submission* b) {
        if (a->date != b->date) return a->date < b->date;
        if (a->bank != b->bank) return a->bank < b->bank;
        return a->tenor < b->tenor;
    });
    out << "date,bank,tenor,rate\n";
    for (const Submission* s : order) {
        out << format_date(s->date) << ',' << csv_escape(s->bank.str()) << ',' << tenor_code(s->tenor)
            << ',' << s->rate.to_string() << '\n';
    }
}

}  // namespace ratefix
