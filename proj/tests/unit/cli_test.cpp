#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ratefix/cli.hpp"
#include "ratefix/simulator.hpp"
#include "support/scenarios.hpp"

using namespace ratefix;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_with(const RunConfig& cfg, const std::string& input = {}) {
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = run(cfg, in, out, err);
    return {code, out.str(), err.str()};
}

RunConfig config_for(Command c, std::initializer_list<std::pair<const char*, const char*>> settings = {}) {
    RunConfig cfg;
    cfg.command = c;
    for (const auto& [k, v] : settings) cfg.apply(k, v);
    return cfg;
}

std::string ten_bank_csv() {
    const char* quotes[] = {"3.0026", "3.0106", "3.0235", "3.0312", "3.0358",
                            "3.0434", "3.0562", "3.0601", "3.0658", "3.0961"};
    std::string csv = "date,bank,tenor,rate\n";
    for (int i = 0; i < 10; ++i) csv += "2008-04-16,BANK" + std::to_string(i + 1) + ",3M," + quotes[i] + "\n";
    return csv;
}

std::string simulated_csv(const ScenarioConfig& c) {
    std::ostringstream out;
    write_submissions_csv(out, generate(c).submissions);
    return out.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("ratefix-cli-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                           "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::string shell(const std::string& cmd, int* status = nullptr) {
    std::string output;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return output;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) output.append(buf.data(), n);
    const int rc = ::pclose(pipe);
    if (status) *status = WEXITSTATUS(rc);
    return output;
}

}  // namespace

TEST(RunConfig, ApplyAndValidate) {
    RunConfig c;
    c.apply("trim-fraction", "0.2");
    c.apply("linkage", "single");
    c.apply("strategy", "single-offset:BANK1:0.1");
    c.apply("strategy", "single-offset:BANK2:0.1");
    EXPECT_DOUBLE_EQ(c.fixing.trim_fraction, 0.2);
    EXPECT_EQ(c.linkage, Linkage::Single);
    EXPECT_EQ(c.strategies.size(), 2u);
    EXPECT_THROW(c.apply("no-such-key", "1"), UsageError);
    EXPECT_THROW(c.apply("trim-fraction", "abc"), UsageError);
    EXPECT_THROW(c.apply("linkage", "complete"), UsageError);
    RunConfig bad;
    bad.command = Command::Cluster;
    bad.format = "xml";
    EXPECT_THROW(bad.validate(), UsageError);
}

TEST(RunConfig, ConfigTextRoundTrip) {
    RunConfig c = config_for(Command::Simulate, {{"seed", "42"},
                                                 {"banks", "9"},
                                                 {"sigma", "0.02"},
                                                 {"base", "linear:3.0:2.5"},
                                                 {"strategy", "collusive:BANK1+BANK2:base-0.05:1-10"},
                                                 {"policy", "forward-fill"},
                                                 {"window", "2008-Q2"}});
    const std::string text = to_config_text(c);
    RunConfig back;
    for (const auto& [k, v] : parse_config_text(text)) back.apply(k, v);
    EXPECT_EQ(to_config_text(back), text);
    EXPECT_EQ(back.seed, 42u);
    EXPECT_EQ(back.policy.missing, MissingData::ForwardFill);
}

TEST(RunConfig, ConfigTextSyntax) {
    const auto kv = parse_config_text("# comment\n\n  seed = 7  \nlinkage=single # trailing\n");
    ASSERT_EQ(kv.size(), 2u);
    EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"seed", "7"}));
    EXPECT_EQ(kv[1], (std::pair<std::string, std::string>{"linkage", "single"}));
    EXPECT_THROW(parse_config_text("seed 7\n"), UsageError);
}

TEST(Run, FixFromQuotes) {
    RunConfig c = config_for(Command::Fix);
    for (const char* q : {"3.0026", "3.0106", "3.0235", "3.0312", "3.0358", "3.0434", "3.0562", "3.0601", "3.0658",
                          "3.0961"}) {
        c.apply("quote", q);
    }
    const Result r = run_with(c);
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("published     3.042"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("raw mean      3.041700"), std::string::npos);
}

TEST(Run, FixFromCsvJson) {
    const Result r = run_with(config_for(Command::Fix, {{"tenor", "3M"}, {"format", "json"}}), ten_bank_csv());
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_DOUBLE_EQ(j["published"].get<double>(), 3.042);
    EXPECT_DOUBLE_EQ(j["raw_mean"].get<double>(), 3.0417);
    EXPECT_NE(r.err.find("3.042"), std::string::npos);
}

TEST(Run, ExitCodes) {
    // no quotes for the selected tenor
    Result r = run_with(config_for(Command::Fix, {{"tenor", "1M"}}), ten_bank_csv());
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(r.err.rfind("ratefix: usage error:", 0), 0u) << r.err;

    r = run_with(config_for(Command::Report), "date,bank,tenor\n");
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.err.rfind("ratefix: data error: [ParseError]", 0), 0u) << r.err;

    r = run_with(config_for(Command::Fix, {{"quote", "3.0"}, {"quote", "3.1"}, {"min-retained", "3"}}));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("[EmptyAfterTrim]"), std::string::npos) << r.err;

    r = run_with(config_for(Command::Cluster, {{"window", "annual"}}), ten_bank_csv());
    EXPECT_EQ(r.code, 1);
}

TEST(Run, ClusterTwoBanksNewick) {
    const std::string csv =
        "date,bank,tenor,rate\n2008-01-02,A,1M,3.0\n2008-01-02,B,1M,3.5\n2008-01-03,A,1M,3.0\n2008-01-03,B,1M,3.5\n";
    Result r = run_with(config_for(Command::Cluster, {{"linkage", "single"}}), csv);
    ASSERT_EQ(r.code, 0) << r.err;
    const double h = std::sqrt(0.5);
    char expected[64];
    std::snprintf(expected, sizeof expected, "(A:%.6f,B:%.6f);\n", h, h);
    EXPECT_EQ(r.out, expected);

    r = run_with(config_for(Command::Cluster, {{"out-format", "json"}}), csv);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["linkage"], "ward");
    EXPECT_EQ(j["merges"].size(), 1u);
    r = run_with(config_for(Command::Cluster, {{"out-format", "dot"}}), csv);
    EXPECT_EQ(r.out.rfind("digraph dendrogram", 0), 0u);
}

TEST(Run, DetectFlagsPlantedBank) {
    const std::string csv = simulated_csv(scenarios::single_offender(4, 12, 250));
    const Result r = run_with(config_for(Command::Detect, {{"format", "json"}}), csv);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j["flagged"].size(), 1u);
    EXPECT_EQ(j["flagged"][0], scenarios::planted_bank(4));
    EXPECT_TRUE(j.contains("collusion_caveat"));
}

TEST(Run, DetectAnnualEmitsArray) {
    ScenarioConfig c = scenarios::honest(2, 5, 400);
    const Result r = run_with(config_for(Command::Detect, {{"window", "annual"}, {"format", "json"}}), simulated_csv(c));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    ASSERT_TRUE(j.is_array());
    EXPECT_EQ(j.size(), 2u);
    EXPECT_EQ(j[0]["window_label"], "IBOR-2008");
    EXPECT_EQ(j[1]["window_label"], "IBOR-2009");
}

TEST(Run, ReportCsv) {
    const Result r = run_with(config_for(Command::Report, {{"format", "csv"}, {"tenor", "3M"}}), ten_bank_csv());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("bank,rate\nBANK1,3.003\n", 0), 0u) << r.out;
    EXPECT_NE(r.out.find("Overall,3.043"), std::string::npos);
}

TEST(Run, SimulateWritesDataAndTruth) {
    TempDir dir;
    const fs::path out = dir.path / "panel.csv";
    RunConfig c = config_for(Command::Simulate, {{"banks", "4"}, {"days", "3"}, {"strategy", "single-offset:BANK2:0.1:2-2"}});
    c.output_path = out.string();
    const Result r = run_with(c);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(out));
    const std::string truth = slurp(dir.path / "panel.truth.csv");
    EXPECT_NE(truth.find("2008-01-03,BANK2,1"), std::string::npos) << truth;
    EXPECT_FALSE(r.out.empty());  // summary goes to stdout when writing a file

    const Result again = run_with(c);
    ASSERT_EQ(again.code, 0);
    EXPECT_EQ(slurp(out), simulated_csv([] {
                  ScenarioConfig s = scenarios::honest(1, 4, 3);
                  s.strategies.push_back(parse_strategy("single-offset:BANK2:0.1:2-2"));
                  return s;
              }()));
}

TEST(Run, WriteFileAtomicReplaces) {
    TempDir dir;
    const fs::path p = dir.path / "x.txt";
    write_file_atomic(p.string(), "one");
    write_file_atomic(p.string(), "two");
    EXPECT_EQ(slurp(p), "two");
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++entries;
    EXPECT_EQ(entries, 1u);
}

TEST(Binary, ConfigFileAndFlagPrecedence) {
    TempDir dir;
    const fs::path cfg = dir.path / "run.conf";
    std::ofstream(cfg) << "# defaults for this test\nbanks = 3\ndays = 2\nseed = 5\n";
    int status = -1;
    const std::string base = std::string(RATEFIX_CLI_PATH) + " --config " + cfg.string() + " simulate";
    const std::string a = shell(base + " 2>/dev/null", &status);
    EXPECT_EQ(status, 0);
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1 + 3 * 2);
    const std::string b = shell(base + " --days 3 2>/dev/null", &status);
    EXPECT_EQ(std::count(b.begin(), b.end(), '\n'), 1 + 3 * 3);
    shell(std::string(RATEFIX_CLI_PATH) + " detect --linkage nope </dev/null 2>/dev/null", &status);
    EXPECT_EQ(status, 1);
}

TEST(Binary, PipelineIsByteIdentical) {
    const std::string cmd = std::string(RATEFIX_CLI_PATH) + " simulate --seed 9 --strategy single-offset:BANK3:0.10 2>/dev/null | " +
                            RATEFIX_CLI_PATH + " detect --format json 2>/dev/null";
    int s1 = -1, s2 = -1;
    const std::string a = shell(cmd, &s1);
    const std::string b = shell(cmd, &s2);
    EXPECT_EQ(s1, 0);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b);
    EXPECT_EQ(nlohmann::json::parse(a)["flagged"][0], "BANK3");
}
