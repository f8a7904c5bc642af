#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ratefix/decimal.hpp"

namespace ratefix {

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD; throws Error(ParseError) on anything else.
Date parse_date(std::string_view text);
std::string format_date(Date date);

class BankId {
public:
    explicit BankId(std::string label);

    const std::string& str() const { return label_; }

    friend auto operator<=>(const BankId&, const BankId&) = default;
    friend bool operator==(const BankId&, const BankId&) = default;

private:
    std::string label_;
};

enum class Tenor { Overnight, Week1, Month1, Month3, Month6, Month12 };

Tenor parse_tenor(std::string_view code);
std::string_view tenor_code(Tenor tenor);

struct Submission {
    BankId bank;
    Date date;
    Tenor tenor;
    Decimal rate;
};

struct DateRange {
    Date first;
    Date last;
};

/// Complete banks x dates matrix of rates for one tenor and period.
/// Banks are kept in the order given; build_window hands them in sorted.
class PanelWindow {
public:
    PanelWindow(std::vector<BankId> banks, std::vector<Date> dates,
                std::vector<Decimal> rates, Tenor tenor, std::string label);

    const std::vector<BankId>& banks() const { return banks_; }
    const std::vector<Date>& dates() const { return dates_; }
    Tenor tenor() const { return tenor_; }
    const std::string& label() const { return label_; }

    std::size_t bank_count() const { return banks_.size(); }
    std::size_t date_count() const { return dates_.size(); }

    Decimal rate(std::size_t bank, std::size_t date) const { return rates_[bank * dates_.size() + date]; }
    std::span<const Decimal> row(std::size_t bank) const;
    std::vector<double> row_values(std::size_t bank) const;

    /// Flattens back into one submission per cell, bank-major.
    std::vector<Submission> to_submissions() const;

    friend bool operator==(const PanelWindow&, const PanelWindow&) = default;

private:
    std::vector<BankId> banks_;
    std::vector<Date> dates_;
    std::vector<Decimal> rates_;  // row-major, banks x dates
    Tenor tenor_;
    std::string label_;
};

enum class MissingData { DropIncomplete, ForwardFill };

struct WindowPolicy {
    MissingData missing = MissingData::DropIncomplete;
    // Longest run of consecutive missing dates that forward-fill may bridge.
    int max_gap = 5;
    // Banks quoting on fewer than this share of the candidate dates are
    // removed before the missing-data policy runs.
    double min_coverage = 0.9;
};

using Warnings = std::vector<std::string>;

PanelWindow build_window(std::span<const Submission> submissions, Tenor tenor, DateRange range,
                         const WindowPolicy& policy, std::string label = {},
                         Warnings* warnings = nullptr);

/// One window per calendar year in [first_year, last_year], labelled
/// "<dataset>-<year>". Years that yield no usable window are skipped with a
/// warning.
std::vector<PanelWindow> annual_windows(std::span<const Submission> submissions, Tenor tenor,
                                        int first_year, int last_year, const WindowPolicy& policy,
                                        std::string_view dataset, Warnings* warnings = nullptr);

/// Earliest and latest date among submissions of the given tenor.
std::optional<DateRange> date_span(std::span<const Submission> submissions, Tenor tenor);

struct CsvOptions {
    // Smallest admissible rate; negative quotes are rejected by default.
    Decimal rate_floor = Decimal::from_micros(0);
};

/// Reads the `date,bank,tenor,rate` submissions format. All malformed rows
/// are reported together in one Error(ParseError) with line numbers.
std::vector<Submission> read_submissions_csv(std::istream& in, const CsvOptions& options = {});
void write_submissions_csv(std::ostream& out, std::span<const Submission> submissions);

}  // namespace ratefix
