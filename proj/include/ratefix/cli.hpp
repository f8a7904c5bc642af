#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ratefix/cluster.hpp"
#include "ratefix/fixing.hpp"
#include "ratefix/panel.hpp"

namespace ratefix {

/// Bad flags, bad flag values, invalid combinations. Exit status 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Command { Fix, Cluster, Detect, Simulate, Report };

Command parse_command(std::string_view name);
std::string_view command_name(Command command);

/// Every setting of a CLI run. Settings are addressed by their long flag
/// name ("trim-fraction", "linkage", ...) in config files and on the command
/// line alike; see docs/FORMATS.md for the full list and defaults.
struct RunConfig {
    Command command = Command::Detect;
    std::string input_path = "-";  // "-" reads stdin
    std::string output_path;       // empty writes to stdout
    std::string truth_path;        // simulate only
    Tenor tenor = Tenor::Month1;
    std::string window;            // "", "all", YYYY, LABEL-YYYY, YYYY-Qn, FROM..TO, annual
    std::string dataset = "IBOR";
    WindowPolicy policy;
    Decimal rate_floor = Decimal::from_micros(0);
    FixingConfig fixing;
    std::optional<Date> date;      // fix: which date to read from the CSV
    std::vector<Decimal> quotes;   // fix: quotes given as arguments
    Linkage linkage = Linkage::Ward;
    bool normalize = false;
    double threshold_factor = 2.0;
    std::string format = "text";      // text | json | csv
    std::string out_format = "newick";  // cluster: newick | dot | json
    std::uint64_t seed = 1;
    std::size_t banks = 12;
    std::size_t days = 250;
    std::string base = "constant:3.0";
    double sigma = 0.01;
    std::vector<std::string> strategies;
    Date start_date = std::chrono::year{2008} / std::chrono::January / 2;

    /// Applies one `key = value` setting; repeatable keys (strategy, quote)
    /// append. Throws UsageError on unknown keys or malformed values.
    void apply(std::string_view key, std::string_view value);

    /// Cross-field checks that do not need input data.
    void validate() const;
};

/// Reads `key = value` lines; blank lines and `#` comments are ignored.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text);

/// Serializes every setting in config-file syntax (round-trips through
/// parse_config_text + apply).
std::string to_config_text(const RunConfig& config);

/// Executes one command. Artifacts go to output_path (written to a temp
/// file and renamed) or to `out`; the one-line summary goes to `out` when an
/// output file is used and to `err` otherwise. Returns 0 on success, 1 on a
/// usage error and 2 on a data error.
int run(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);

/// Writes `contents` to `path` via a sibling temp file and rename.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace ratefix
