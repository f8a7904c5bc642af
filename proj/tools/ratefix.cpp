// ratefix command-line front end: parses flags, layers them over an
// optional config file, and hands the resulting RunConfig to ratefix::run.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ratefix/cli.hpp"

namespace {

struct Flags {
    std::map<std::string, std::string> single;
    std::map<std::string, std::vector<std::string>> repeated;
    std::vector<std::pair<CLI::Option*, std::string>> options;
    std::string config_path;
};

void value(CLI::App* app, Flags& flags, const std::string& key, const std::string& help,
           const std::string& short_name = "") {
    const std::string names = short_name.empty() ? "--" + key : short_name + ",--" + key;
    flags.options.emplace_back(app->add_option(names, flags.single[key], help), key);
}

void data_options(CLI::App* app, Flags& flags) {
    value(app, flags, "input", "submissions CSV (date,bank,tenor,rate); '-' for stdin", "-i");
    value(app, flags, "output", "write the artifact to this file instead of stdout", "-o");
    value(app, flags, "tenor", "tenor code: O/N 1W 1M 3M 6M 12M (default 1M)");
    value(app, flags, "rate-floor", "smallest admissible rate (default 0)");
}

void window_options(CLI::App* app, Flags& flags) {
    value(app, flags, "window", "all | YYYY | LABEL-YYYY | YYYY-Qn | FROM..TO | annual");
    value(app, flags, "dataset", "dataset name used in window labels (default IBOR)");
    value(app, flags, "policy", "missing data: drop-incomplete | forward-fill");
    value(app, flags, "max-gap", "forward-fill: longest bridged run of missing dates (default 5)");
    value(app, flags, "min-coverage", "drop banks quoting on fewer than this share of dates (default 0.9)");
}

void linkage_options(CLI::App* app, Flags& flags) {
    value(app, flags, "linkage", "single | ward (default ward)");
    flags.options.emplace_back(app->add_flag("--normalize", "z-normalize each series before clustering"),
                               "normalize");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ratefix: benchmark fixing reproduction and submission surveillance"};
    app.require_subcommand(1);
    Flags flags;
    app.add_option("--config", flags.config_path, "settings file (key = value); defaults to $RATEFIX_CONFIG");

    auto* fix = app.add_subcommand("fix", "trimmed-mean fixing for one date's quotes");
    data_options(fix, flags);
    value(fix, flags, "date", "date to read from the input CSV (YYYY-MM-DD)");
    value(fix, flags, "trim-fraction", "share trimmed from each tail (default 0.25)");
    value(fix, flags, "precision", "decimal places of the published rate (default 3)");
    value(fix, flags, "min-retained", "quotes that must survive trimming (default 1)");
    value(fix, flags, "format", "text | json");
    fix->add_option("quotes", flags.repeated["quote"], "quotes given directly instead of --input");

    auto* cluster = app.add_subcommand("cluster", "dendrogram of one window's submission series");
    data_options(cluster, flags);
    window_options(cluster, flags);
    linkage_options(cluster, flags);
    value(cluster, flags, "out-format", "newick | dot | json (default newick)");

    auto* detect = app.add_subcommand("detect", "flag banks that stay isolated in the dendrogram");
    data_options(detect, flags);
    window_options(detect, flags);
    linkage_options(detect, flags);
    value(detect, flags, "threshold-factor", "flag persistence above factor x median merge height (default 2.0)");
    value(detect, flags, "format", "text | json");

    auto* report = app.add_subcommand("report", "average daily rate per bank with an overall row");
    data_options(report, flags);
    window_options(report, flags);
    value(report, flags, "format", "text | csv");

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic submissions dataset");
    value(simulate, flags, "output", "submissions CSV path (stdout when omitted)", "-o");
    value(simulate, flags, "truth", "truth-mask CSV path (default <output>.truth.csv)");
    value(simulate, flags, "tenor", "tenor code (default 1M)");
    value(simulate, flags, "banks", "panel size (default 12)");
    value(simulate, flags, "days", "number of weekdays (default 250)");
    value(simulate, flags, "base", "constant:L | linear:L0:L1 | shock:L:DAY:SIZE (default constant:3.0)");
    value(simulate, flags, "sigma", "daily noise standard deviation (default 0.01)");
    value(simulate, flags, "seed", "64-bit seed (default 1)");
    value(simulate, flags, "start-date", "first date (default 2008-01-02)");
    simulate->add_option("--strategy", flags.repeated["strategy"],
                         "single-offset:BANK:OFFSET[:D1-D2] | single-fixed:BANK:RATE[:D1-D2] | "
                         "collusive:B1+B2:RATE[:D1-D2] (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "ratefix: usage error: " << e.what() << '\n';
        return 1;
    }

    ratefix::RunConfig config;
    try {
        std::string config_path = flags.config_path;
        if (config_path.empty()) {
            if (const char* env = std::getenv("RATEFIX_CONFIG")) config_path = env;
        }
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw ratefix::UsageError("cannot read config file " + config_path);
            std::stringstream text;
            text << f.rdbuf();
            for (const auto& [key, val] : ratefix::parse_config_text(text.str())) config.apply(key, val);
        }
        config.command = ratefix::parse_command(app.get_subcommands().front()->get_name());
        for (const auto& [opt, key] : flags.options) {
            if (opt->count() == 0) continue;
            config.apply(key, key == "normalize" ? std::string("true") : flags.single[key]);
        }
        for (const auto& [key, values] : flags.repeated) {
            for (const auto& v : values) config.apply(key, v);
        }
    } catch (const ratefix::UsageError& e) {
        std::cerr << "ratefix: usage error: " << e.what() << '\n';
        return 1;
    }
    return ratefix::run(config, std::cin, std::cout, std::cerr);
}
