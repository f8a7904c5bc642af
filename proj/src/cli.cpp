#include "ratefix/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "json_util.hpp"
#include "parse_util.hpp"
#include "ratefix/anomaly.hpp"
#include "ratefix/error.hpp"
#include "ratefix/simulator.hpp"

namespace ratefix {

namespace {

template <typename F>
auto as_usage(std::string_view key, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw UsageError("--" + std::string(key) + ": " + e.what());
    }
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw UsageError("--" + std::string(key) + ": expected true or false, got '" + std::string(v) + "'");
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string missing_name(MissingData m) { return m == MissingData::DropIncomplete ? "drop-incomplete" : "forward-fill"; }

}  // namespace

Command parse_command(std::string_view name) {
    if (name == "fix") return Command::Fix;
    if (name == "cluster") return Command::Cluster;
    if (name == "detect") return Command::Detect;
    if (name == "simulate") return Command::Simulate;
    if (name == "report") return Command::Report;
    throw UsageError("unknown command '" + std::string(name) + "'");
}

std::string_view command_name(Command command) {
    switch (command) {
        case Command::Fix: return "fix";
        case Command::Cluster: return "cluster";
        case Command::Detect: return "detect";
        case Command::Simulate: return "simulate";
        case Command::Report: return "report";
    }
    return "?";
}

void RunConfig::apply(std::string_view key, std::string_view value) {
    using detail::parse_double;
    using detail::parse_uint;
    value = trim(value);
    auto real = [&] { return as_usage(key, [&] { return parse_double(value, key); }); };
    auto count = [&] { return as_usage(key, [&] { return static_cast<std::size_t>(parse_uint(value, key)); }); };

    if (key == "command") command = parse_command(value);
    else if (key == "input") input_path = value;
    else if (key == "output") output_path = value;
    else if (key == "truth") truth_path = value;
    else if (key == "tenor") tenor = as_usage(key, [&] { return parse_tenor(value); });
    else if (key == "window") window = value;
    else if (key == "dataset") dataset = value;
    else if (key == "policy") {
        if (value == "drop-incomplete") policy.missing = MissingData::DropIncomplete;
        else if (value == "forward-fill") policy.missing = MissingData::ForwardFill;
        else throw UsageError("--policy: expected drop-incomplete or forward-fill");
    }
    else if (key == "max-gap") policy.max_gap = static_cast<int>(count());
    else if (key == "min-coverage") policy.min_coverage = real();
    else if (key == "rate-floor") rate_floor = as_usage(key, [&] { return Decimal::parse(value); });
    else if (key == "trim-fraction") fixing.trim_fraction = real();
    else if (key == "precision") fixing.publish_precision = static_cast<int>(count());
    else if (key == "min-retained") fixing.min_retained = count();
    else if (key == "date") date = as_usage(key, [&] { return parse_date(value); });
    else if (key == "quote") quotes.push_back(as_usage(key, [&] { return Decimal::parse(value); }));
    else if (key == "linkage") linkage = as_usage(key, [&] { return parse_linkage(value); });
    else if (key == "normalize") normalize = parse_bool(key, value);
    else if (key == "threshold-factor") threshold_factor = real();
    else if (key == "format") format = value;
    else if (key == "out-format") out_format = value;
    else if (key == "seed") seed = as_usage(key, [&] { return parse_uint(value, key); });
    else if (key == "banks") banks = count();
    else if (key == "days") days = count();
    else if (key == "base") base = value;
    else if (key == "sigma") sigma = real();
    else if (key == "strategy") strategies.emplace_back(value);
    else if (key == "start-date") start_date = as_usage(key, [&] { return parse_date(value); });
    else throw UsageError("unknown setting '" + std::string(key) + "'");
}

void RunConfig::validate() const {
    as_usage("trim-fraction", [&] { fixing.validate(); });
    if (!(threshold_factor >= 0.0) || !std::isfinite(threshold_factor)) {
        throw UsageError("--threshold-factor must be a finite non-negative number");
    }
    if (!(policy.min_coverage >= 0.0 && policy.min_coverage <= 1.0)) {
        throw UsageError("--min-coverage must lie in [0, 1]");
    }
    static const std::set<std::string> formats{"text", "json", "csv"};
    if (!formats.contains(format)) throw UsageError("--format must be text, json or csv");
    if (format == "csv" && command != Command::Report) throw UsageError("--format csv is only valid for report");
    if (format == "json" && command == Command::Report) throw UsageError("report supports --format text or csv");
    static const std::set<std::string> out_formats{"newick", "dot", "json"};
    if (!out_formats.contains(out_format)) throw UsageError("--out-format must be newick, dot or json");
    if (command == Command::Fix && !quotes.empty() && input_path != "-") {
        throw UsageError("fix takes quotes either as arguments or from --input, not both");
    }
    if (command == Command::Simulate) {
        ScenarioConfig scenario;
        scenario.n_banks = banks;
        scenario.n_days = days;
        scenario.noise_sigma = sigma;
        try {
            scenario.base = BaseCurve::parse(base);
            for (const auto& s : strategies) scenario.strategies.push_back(parse_strategy(s));
            scenario.validate();
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t line_no = 0;
    for (auto line : detail::split(text, '\n')) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        out.emplace_back(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
    }
    return out;
}

std::string to_config_text(const RunConfig& c) {
    using detail::format_double;
    std::ostringstream out;
    out << "command = " << command_name(c.command) << '\n';
    out << "input = " << c.input_path << '\n';
    if (!c.output_path.empty()) out << "output = " << c.output_path << '\n';
    if (!c.truth_path.empty()) out << "truth = " << c.truth_path << '\n';
    out << "tenor = " << tenor_code(c.tenor) << '\n';
    if (!c.window.empty()) out << "window = " << c.window << '\n';
    out << "dataset = " << c.dataset << '\n';
    out << "policy = " << missing_name(c.policy.missing) << '\n';
    out << "max-gap = " << c.policy.max_gap << '\n';
    out << "min-coverage = " << format_double(c.policy.min_coverage) << '\n';
    out << "rate-floor = " << c.rate_floor.to_string() << '\n';
    out << "trim-fraction = " << format_double(c.fixing.trim_fraction) << '\n';
    out << "precision = " << c.fixing.publish_precision << '\n';
    out << "min-retained = " << c.fixing.min_retained << '\n';
    if (c.date) out << "date = " << format_date(*c.date) << '\n';
    for (Decimal q : c.quotes) out << "quote = " << q.to_string() << '\n';
    out << "linkage = " << linkage_name(c.linkage) << '\n';
    out << "normalize = " << (c.normalize ? "true" : "false") << '\n';
    out << "threshold-factor = " << format_double(c.threshold_factor) << '\n';
    out << "format = " << c.format << '\n';
    out << "out-format = " << c.out_format << '\n';
    out << "seed = " << c.seed << '\n';
    out << "banks = " << c.banks << '\n';
    out << "days = " << c.days << '\n';
    out << "base = " << c.base << '\n';
    out << "sigma = " << format_double(c.sigma) << '\n';
    for (const auto& s : c.strategies) out << "strategy = " << s << '\n';
    out << "start-date = " << format_date(c.start_date) << '\n';
    return out.str();
}

void write_file_atomic(const std::string& path, std::string_view contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(Errc::InvalidArgument, "cannot write " + tmp.string());
        f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        f.flush();
        if (!f) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error(Errc::InvalidArgument, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(Errc::InvalidArgument, "cannot rename into " + path);
    }
}

namespace {

struct Context {
    const RunConfig& config;
    std::istream& in;
    std::ostream& out;
    std::ostream& err;

    void warn(const std::string& msg) const { err << "ratefix: warning: " << msg << '\n'; }

    std::vector<Submission> load() const {
        CsvOptions options;
        options.rate_floor = config.rate_floor;
        if (config.input_path == "-") return read_submissions_csv(in, options);
        std::ifstream f(config.input_path);
        if (!f) throw Error(Errc::ParseError, "cannot open input file " + config.input_path);
        return read_submissions_csv(f, options);
    }

    // Writes the artifact and reports the summary line on the other stream.
    void emit(const std::string& artifact, const std::string& summary) const {
        if (config.output_path.empty()) {
            out << artifact;
            if (!artifact.empty() && artifact.back() != '\n') out << '\n';
            err << summary << '\n';
        } else {
            write_file_atomic(config.output_path, (artifact.empty() || artifact.back() == '\n') ? artifact : artifact + "\n");
            out << summary << '\n';
        }
    }
};

bool is_year(std::string_view s) {
    return s.size() == 4 && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<PanelWindow> resolve_windows(const Context& ctx, const std::vector<Submission>& subs) {
    const RunConfig& c = ctx.config;
    Warnings warnings;
    std::vector<PanelWindow> windows;
    const auto span = date_span(subs, c.tenor);
    if (!span) {
        throw Error(Errc::EmptyWindow, "input has no submissions for tenor " + std::string(tenor_code(c.tenor)));
    }
    using namespace std::chrono;
    auto year_range = [](int y) { return DateRange{year{y} / January / 1, year{y} / December / 31}; };

    std::string_view w = c.window;
    if (w == "annual") {
        windows = annual_windows(subs, c.tenor, static_cast<int>(span->first.year()),
                                 static_cast<int>(span->last.year()), c.policy, c.dataset, &warnings);
        if (windows.empty()) throw Error(Errc::EmptyWindow, "no year yields a usable window");
    } else {
        DateRange range = *span;
        std::string label = c.dataset + "-all";
        if (w.empty() || w == "all") {
        } else if (is_year(w)) {
            range = year_range(std::stoi(std::string(w)));
            label = c.dataset + "-" + std::string(w);
        } else if (const auto dots = w.find(".."); dots != std::string_view::npos) {
            try {
                range = DateRange{parse_date(w.substr(0, dots)), parse_date(w.substr(dots + 2))};
            } catch (const Error& e) {
                throw UsageError(std::string("--window: ") + e.what());
            }
            label = c.dataset + "-" + std::string(w);
        } else if (w.size() == 7 && is_year(w.substr(0, 4)) && w.substr(4, 2) == "-Q" && w[6] >= '1' && w[6] <= '4') {
            const int y = std::stoi(std::string(w.substr(0, 4)));
            const unsigned q = static_cast<unsigned>(w[6] - '0');
            const month first_month{3 * q - 2};
            const month last_month{3 * q};
            range = DateRange{year{y} / first_month / 1, year_month_day{year{y} / last_month / std::chrono::last}};
            label = c.dataset + "-" + std::string(w);
        } else if (w.size() > 5 && w[w.size() - 5] == '-' && is_year(w.substr(w.size() - 4))) {
            range = year_range(std::stoi(std::string(w.substr(w.size() - 4))));
            label = std::string(w);
        } else {
            throw UsageError("--window: expected all, YYYY, LABEL-YYYY, YYYY-Qn, FROM..TO or annual");
        }
        windows.push_back(build_window(subs, c.tenor, range, c.policy, label, &warnings));
    }
    for (const auto& msg : warnings) ctx.warn(msg);
    return windows;
}

std::string fixing_json(const FixingResult& r, std::size_t n, std::size_t trim, const std::optional<Date>& date,
                        Tenor tenor) {
    auto decimals = [](const std::vector<Decimal>& v) {
        auto a = nlohmann::ordered_json::array();
        for (Decimal d : v) a.push_back(detail::round6(d.to_double()));
        return a;
    };
    nlohmann::ordered_json j;
    if (date) j["date"] = format_date(*date);
    j["tenor"] = tenor_code(tenor);
    j["quotes"] = n;
    j["trim_count"] = trim;
    j["raw_mean"] = detail::round6(r.raw_mean.to_double());
    j["published"] = detail::round6(r.published.to_double());
    j["retained"] = decimals(r.retained);
    j["trimmed_low"] = decimals(r.trimmed_low);
    j["trimmed_high"] = decimals(r.trimmed_high);
    return j.dump(2);
}

std::string fixing_text(const FixingResult& r, std::size_t n, std::size_t trim, int precision) {
    auto list = [](const std::vector<Decimal>& v) {
        std::string s;
        for (Decimal d : v) s += (s.empty() ? "" : " ") + d.to_string();
        return s.empty() ? std::string("-") : s;
    };
    std::ostringstream out;
    out << "quotes        " << n << '\n';
    out << "trim count    " << trim << " per side\n";
    out << "trimmed low   " << list(r.trimmed_low) << '\n';
    out << "retained      " << list(r.retained) << '\n';
    out << "trimmed high  " << list(r.trimmed_high) << '\n';
    out << "raw mean      " << r.raw_mean.to_string() << '\n';
    out << "published     " << r.published.to_string(std::min(precision, Decimal::kDigits)) << '\n';
    return out.str();
}

void run_fix(const Context& ctx) {
    const RunConfig& c = ctx.config;
    std::vector<Decimal> quotes = c.quotes;
    std::optional<Date> date = c.date;
    if (quotes.empty()) {
        const auto subs = ctx.load();
        std::set<Date> dates;
        for (const auto& s : subs) {
            if (s.tenor == c.tenor) dates.insert(s.date);
        }
        if (!date) {
            if (dates.size() != 1) {
                throw UsageError("input holds " + std::to_string(dates.size()) +
                                 " dates for this tenor; choose one with --date");
            }
            date = *dates.begin();
        }
        std::set<std::string> seen;
        for (const auto& s : subs) {
            if (s.tenor != c.tenor || s.date != *date) continue;
            if (!seen.insert(s.bank.str()).second) {
                throw Error(Errc::DuplicateSubmission, "duplicate submission for " + s.bank.str());
            }
            quotes.push_back(s.rate);
        }
        if (quotes.empty()) throw Error(Errc::EmptyAfterTrim, "no quotes on " + format_date(*date));
    }
    const FixingResult r = compute_fixing(quotes, c.fixing);
    const std::size_t trim = c.fixing.trim_count(quotes.size());
    const std::string artifact = c.format == "json" ? fixing_json(r, quotes.size(), trim, date, c.tenor)
                                                    : fixing_text(r, quotes.size(), trim, c.fixing.publish_precision);
    ctx.emit(artifact, "fix: published " + r.published.to_string(std::min(c.fixing.publish_precision, 6)) + " (raw " +
                           r.raw_mean.to_string() + ", " + std::to_string(r.retained.size()) + " of " +
                           std::to_string(quotes.size()) + " retained)");
}

void run_cluster(const Context& ctx) {
    const RunConfig& c = ctx.config;
    if (c.window == "annual") throw UsageError("cluster works on a single window; pick one with --window");
    const auto subs = ctx.load();
    const auto windows = resolve_windows(ctx, subs);
    const PanelWindow& window = windows.front();
    const Dendrogram tree = agglomerate(distance_matrix(window, c.normalize), c.linkage);
    std::string artifact;
    if (c.out_format == "newick") artifact = to_newick(tree);
    else if (c.out_format == "dot") artifact = to_dot(tree);
    else artifact = to_json(tree, c.linkage);
    ctx.emit(artifact, "cluster: " + window.label() + ", " + std::to_string(window.bank_count()) + " banks x " +
                           std::to_string(window.date_count()) + " dates, " + std::string(linkage_name(c.linkage)) +
                           " linkage, root height " + detail::fixed6(tree.root_height()));
}

void run_detect(const Context& ctx) {
    const RunConfig& c = ctx.config;
    const auto subs = ctx.load();
    const auto windows = resolve_windows(ctx, subs);
    DetectOptions options{c.linkage, c.threshold_factor, c.normalize};

    std::vector<std::string> parts;
    std::size_t flagged = 0;
    std::string flagged_names;
    for (const PanelWindow& w : windows) {
        const AnomalyReport report = flag_anomalies(w, options);
        const CollusionCaveat caveat = collusion_caveat_report(report, w, c.normalize);
        parts.push_back(c.format == "json" ? to_json(report, &caveat) : to_text(report, &caveat));
        flagged += report.flagged.size();
        for (const auto& b : report.flagged) flagged_names += (flagged_names.empty() ? "" : ",") + b;
    }
    std::string artifact;
    if (c.format == "json") {
        if (parts.size() == 1) {
            artifact = parts.front();
        } else {
            artifact = "[\n";
            for (std::size_t i = 0; i < parts.size(); ++i) artifact += parts[i] + (i + 1 < parts.size() ? ",\n" : "\n");
            artifact += "]";
        }
    } else {
        for (std::size_t i = 0; i < parts.size(); ++i) artifact += (i ? "\n" : "") + parts[i];
    }
    ctx.emit(artifact, "detect: " + std::to_string(windows.size()) + " window(s), " + std::to_string(flagged) +
                           " flagged" + (flagged_names.empty() ? "" : " (" + flagged_names + ")"));
}

void run_report(const Context& ctx) {
    const RunConfig& c = ctx.config;
    const auto subs = ctx.load();
    const auto windows = resolve_windows(ctx, subs);
    std::string artifact;
    if (c.format == "csv") {
        if (windows.size() == 1) {
            artifact = to_csv(average_daily_rates(windows.front()));
        } else {
            artifact = "window,bank,rate\n";
            for (const auto& w : windows) {
                const std::string csv = to_csv(average_daily_rates(w));
                std::istringstream lines(csv);
                std::string line;
                std::getline(lines, line);  // header
                while (std::getline(lines, line)) artifact += w.label() + "," + line + "\n";
            }
        }
    } else {
        for (std::size_t i = 0; i < windows.size(); ++i) {
            artifact += (i ? "\n" : "") + to_text(average_daily_rates(windows[i]));
        }
    }
    ctx.emit(artifact, "report: " + std::to_string(windows.size()) + " window(s)");
}

void run_simulate(const Context& ctx) {
    const RunConfig& c = ctx.config;
    ScenarioConfig scenario;
    scenario.n_banks = c.banks;
    scenario.n_days = c.days;
    scenario.base = BaseCurve::parse(c.base);
    scenario.noise_sigma = c.sigma;
    scenario.seed = c.seed;
    scenario.tenor = c.tenor;
    scenario.start_date = c.start_date;
    for (const auto& s : c.strategies) scenario.strategies.push_back(parse_strategy(s));
    const GeneratedPanel panel = generate(scenario);

    std::ostringstream csv;
    write_submissions_csv(csv, panel.submissions);
    std::string truth_path = c.truth_path;
    if (truth_path.empty() && !c.output_path.empty()) {
        std::filesystem::path p(c.output_path);
        truth_path = (p.parent_path() / (p.stem().string() + ".truth.csv")).string();
    }
    if (!truth_path.empty()) {
        std::ostringstream truth;
        write_truth_csv(truth, panel);
        write_file_atomic(truth_path, truth.str());
    }
    ctx.emit(csv.str(), "simulate: " + std::to_string(c.banks) + " banks x " + std::to_string(c.days) + " days, " +
                            std::to_string(panel.manipulated_count()) + " manipulated cells, seed " +
                            std::to_string(c.seed));
}

}  // namespace

int run(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
    try {
        config.validate();
        const Context ctx{config, in, out, err};
        switch (config.command) {
            case Command::Fix: run_fix(ctx); break;
            case Command::Cluster: run_cluster(ctx); break;
            case Command::Detect: run_detect(ctx); break;
            case Command::Simulate: run_simulate(ctx); break;
            case Command::Report: run_report(ctx); break;
        }
        return 0;
    } catch (const UsageError& e) {
        err << "ratefix: usage error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "ratefix: data error: [" << errc_name(e.code()) << "] " << e.what() << '\n';
        return 2;
    }
}

}  // namespace ratefix
