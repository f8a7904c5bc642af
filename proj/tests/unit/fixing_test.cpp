#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "ratefix/error.hpp"
#include "ratefix/fixing.hpp"
#include "support/oracles.hpp"

using namespace ratefix;

namespace {

std::vector<Decimal> decimals(std::initializer_list<const char*> texts) {
    std::vector<Decimal> out;
    for (const char* t : texts) out.push_back(Decimal::parse(t));
    return out;
}

// Ten-bank example quotes; the manipulated variant has bank 9 at 3.0000.
std::vector<Decimal> ten_bank_quotes() {
    return decimals({"3.0026", "3.0106", "3.0235", "3.0312", "3.0358", "3.0434", "3.0562", "3.0601", "3.0658", "3.0961"});
}

std::vector<Decimal> random_panel(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<std::int64_t> micros(0, 6'000'000);
    std::vector<Decimal> q(n);
    for (auto& d : q) d = Decimal::from_micros(micros(rng));
    return q;
}

std::vector<std::int64_t> micros_of(const std::vector<Decimal>& q) {
    std::vector<std::int64_t> out;
    for (Decimal d : q) out.push_back(d.micros());
    return out;
}

}  // namespace

TEST(ComputeFixing, UnmanipulatedTenBankExample) {
    const FixingResult r = compute_fixing(ten_bank_quotes(), FixingConfig{0.25, 3, 1});
    EXPECT_EQ(r.raw_mean, Decimal::parse("3.041700"));
    EXPECT_EQ(r.published.to_string(3), "3.042");
    // reference figure 3.04168, accepted within 5e-4
    EXPECT_LE(std::abs(r.raw_mean.to_double() - 3.04168), 5e-4);
    EXPECT_EQ(r.trimmed_low, decimals({"3.0026", "3.0106"}));
    EXPECT_EQ(r.trimmed_high, decimals({"3.0658", "3.0961"}));
    EXPECT_EQ(r.retained.size(), 6u);
}

TEST(ComputeFixing, ManipulatedTenBankExample) {
    auto q = ten_bank_quotes();
    q[8] = Decimal::parse("3.0000");
    const FixingResult r = compute_fixing(q, FixingConfig{});
    EXPECT_EQ(r.raw_mean, Decimal::parse("3.033450"));
    EXPECT_EQ(r.published.to_string(3), "3.033");
    EXPECT_LE(std::abs(r.raw_mean.to_double() - 3.0334), 5e-4);
}

TEST(ComputeFixing, NoTrimCountGivesReferenceFigure) {
    // 3.04168 is not reachable by any trim count on these quotes.
    const auto q = ten_bank_quotes();
    const Decimal t0 = compute_fixing(q, FixingConfig{0.0}).raw_mean;
    const Decimal t1 = compute_fixing(q, FixingConfig{0.1}).raw_mean;
    const Decimal t2 = compute_fixing(q, FixingConfig{0.2}).raw_mean;
    EXPECT_EQ(t0, Decimal::parse("3.04253"));
    EXPECT_EQ(t1, Decimal::parse("3.040825"));
    EXPECT_EQ(t2, Decimal::parse("3.0417"));
    for (Decimal d : {t0, t1, t2}) EXPECT_NE(d, Decimal::parse("3.04168"));
}

TEST(ComputeFixing, IdenticalQuotes) {
    const std::vector<Decimal> q(10, Decimal::parse("3.000"));
    const FixingResult r = compute_fixing(q);
    EXPECT_EQ(r.raw_mean, Decimal::parse("3"));
    EXPECT_EQ(r.published, Decimal::parse("3"));
}

TEST(ComputeFixing, PublishedRoundsExactMeanNotRawMean) {
    // exact mean 1.0004995 -> raw 1.000500; published at 3dp must be 1.000
    const auto q = decimals({"1.000999", "1.000000"});
    const FixingResult r = compute_fixing(q, FixingConfig{0.0, 3, 1});
    EXPECT_EQ(r.raw_mean, Decimal::parse("1.0005"));
    EXPECT_EQ(r.published, Decimal::parse("1.000"));
}

TEST(ComputeFixing, Errors) {
    try {
        compute_fixing({}, FixingConfig{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::EmptyAfterTrim);
    }
    try {
        compute_fixing(ten_bank_quotes(), FixingConfig{0.25, 3, 7});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::EmptyAfterTrim);
    }
    EXPECT_THROW(compute_fixing(ten_bank_quotes(), FixingConfig{0.5}), Error);
    EXPECT_THROW(compute_fixing(ten_bank_quotes(), FixingConfig{0.25, -1}), Error);
    try {
        quotes_from_doubles(std::vector<double>{1.0, std::numeric_limits<double>::infinity()});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NonFiniteQuote);
    }
}

TEST(ComputeFixing, TrimCountIsFloorOfFraction) {
    EXPECT_EQ((FixingConfig{0.25}.trim_count(10)), 2u);
    EXPECT_EQ((FixingConfig{0.25}.trim_count(16)), 4u);
    EXPECT_EQ((FixingConfig{0.1}.trim_count(9)), 0u);
    EXPECT_EQ((FixingConfig{0.29}.trim_count(100)), 29u);
}

TEST(ComputeFixing, BoundaryTiesTrimmedByPosition) {
    const auto q = decimals({"2", "1", "2", "2", "3"});
    const FixingResult r = compute_fixing(q, FixingConfig{0.2});
    EXPECT_EQ(r.trimmed_low, decimals({"1"}));
    EXPECT_EQ(r.retained, decimals({"2", "2", "2"}));
    EXPECT_EQ(r.trimmed_high, decimals({"3"}));
}

TEST(ComputeFixing, MatchesSortSliceAverageOracle) {
    std::mt19937_64 rng(2024);
    for (int iter = 0; iter < 3000; ++iter) {
        const std::size_t n = 1 + rng() % 8;
        const double fraction = std::vector<double>{0.0, 0.1, 0.2, 0.25, 0.3, 0.49}[rng() % 6];
        const FixingConfig cfg{fraction};
        const auto q = random_panel(rng, n);
        const std::size_t trim = cfg.trim_count(n);
        const auto [num, den] = oracle::trimmed_mean_fraction(micros_of(q), trim);
        ASSERT_EQ(compute_fixing(q, cfg).raw_mean.micros(), oracle::round_fraction(num, den));
    }
}

TEST(ComputeFixingProperties, PermutationTranslationBoundsMonotonicity) {
    std::mt19937_64 rng(77);
    for (int iter = 0; iter < 500; ++iter) {
        const std::size_t n = 3 + rng() % 14;
        auto q = random_panel(rng, n);
        const FixingConfig cfg{0.25};
        const FixingResult base = compute_fixing(q, cfg);

        auto shuffled = q;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        EXPECT_EQ(compute_fixing(shuffled, cfg).raw_mean, base.raw_mean);

        const Decimal c = Decimal::from_micros(static_cast<std::int64_t>(rng() % 2'000'000) - 1'000'000);
        auto moved = q;
        for (auto& d : moved) d += c;
        EXPECT_EQ(compute_fixing(moved, cfg).raw_mean, base.raw_mean + c);

        EXPECT_GE(base.raw_mean, *std::min_element(q.begin(), q.end()));
        EXPECT_LE(base.raw_mean, *std::max_element(q.begin(), q.end()));
        EXPECT_GE(base.raw_mean, base.retained.front());
        EXPECT_LE(base.raw_mean, base.retained.back());
        EXPECT_EQ(base.trimmed_low.size(), base.trimmed_high.size());

        const std::size_t who = rng() % n;
        Decimal prev = Decimal::from_micros(INT64_MIN / 4);
        for (std::int64_t x = 0; x <= 7'000'000; x += 250'000) {
            auto swept = q;
            swept[who] = Decimal::from_micros(x);
            const Decimal v = compute_fixing(swept, cfg).raw_mean;
            EXPECT_GE(v, prev);
            prev = v;
        }
    }
}

TEST(SingleBankImpact, TenBankLowball) {
    const auto q = ten_bank_quotes();
    EXPECT_EQ(single_bank_impact(q, 8, Decimal::parse("3.0000")), Decimal::parse("-0.00825"));
    EXPECT_EQ(single_bank_impact(q, 8, q[8]), Decimal{});
    EXPECT_THROW(single_bank_impact(q, 10, q[0]), Error);
}

TEST(SingleBankImpact, SaturatesBelowLowerTrimBoundary) {
    // Brute force over 0..4 at 1e-4: every quote at or below the lower
    // boundary (3.0106, the second-lowest other quote) yields the same delta.
    const auto q = ten_bank_quotes();
    const Decimal boundary = Decimal::parse("3.0106");
    const Decimal expected = single_bank_impact(q, 8, Decimal::parse("3.0000"));
    EXPECT_EQ(single_bank_impact(q, 8, Decimal::parse("0.0000")), expected);
    for (std::int64_t x = 0; x <= 4'000'000; x += 100) {
        const Decimal rate = Decimal::from_micros(x);
        const Decimal delta = single_bank_impact(q, 8, rate);
        if (rate <= boundary) {
            ASSERT_EQ(delta, expected) << rate.to_string();
        } else {
            ASSERT_GT(delta, expected) << rate.to_string();
        }
    }
}

TEST(InfluenceEnvelope, TenBankMatchesGridSearch) {
    const auto q = ten_bank_quotes();
    const FixingConfig cfg{};
    const InfluenceEnvelope env = influence_envelope(q, 8, cfg, Decimal::parse("0"), Decimal::parse("10"));
    EXPECT_EQ(env.min_fixing, Decimal::parse("3.033450"));

    Decimal lo = Decimal::from_micros(INT64_MAX / 4), hi = Decimal::from_micros(INT64_MIN / 4);
    auto sweep = q;
    for (std::int64_t x = 0; x <= 10'000'000; x += 100) {
        sweep[8] = Decimal::from_micros(x);
        const Decimal v = compute_fixing(sweep, cfg).raw_mean;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    EXPECT_EQ(env.min_fixing, lo);
    EXPECT_EQ(env.max_fixing, hi);
}

TEST(InfluenceEnvelope, SingleRetainedQuoteIsClipped) {
    const auto q = decimals({"1.0", "2.0", "3.0"});
    const FixingConfig cfg{0.34};
    ASSERT_EQ(cfg.trim_count(3), 1u);
    // attacker is the middle quote; the others bound its reach
    auto env = influence_envelope(q, 1, cfg, Decimal::parse("0"), Decimal::parse("5"));
    EXPECT_EQ(env.min_fixing, Decimal::parse("1.0"));
    EXPECT_EQ(env.max_fixing, Decimal::parse("3.0"));
    env = influence_envelope(q, 1, cfg, Decimal::parse("1.5"), Decimal::parse("2.5"));
    EXPECT_EQ(env.min_fixing, Decimal::parse("1.5"));
    EXPECT_EQ(env.max_fixing, Decimal::parse("2.5"));
    for (std::int64_t x = 0; x <= 5'000'000; x += 50'000) {
        auto s = q;
        s[1] = Decimal::from_micros(x);
        EXPECT_EQ(compute_fixing(s, cfg).raw_mean, std::clamp(s[1], q[0], q[2]));
    }
}

TEST(InfluenceEnvelope, CollapsedBoundsGiveCurrentFixing) {
    const auto q = ten_bank_quotes();
    const Decimal current = compute_fixing(q).raw_mean;
    const auto env = influence_envelope(q, 3, FixingConfig{}, q[3], q[3]);
    EXPECT_EQ(env.min_fixing, current);
    EXPECT_EQ(env.max_fixing, current);
    EXPECT_THROW(influence_envelope(q, 3, FixingConfig{}, q[4], q[3]), Error);
}

TEST(InfluenceEnvelope, RandomPanelsMatchGridSearch) {
    std::mt19937_64 rng(5);
    for (int iter = 0; iter < 60; ++iter) {
        const std::size_t n = 2 + rng() % 10;
        const FixingConfig cfg{std::vector<double>{0.0, 0.1, 0.25}[rng() % 3]};
        const auto q = random_panel(rng, n);
        const std::size_t who = rng() % n;
        const auto env = influence_envelope(q, who, cfg, Decimal::parse("0"), Decimal::parse("6"));
        Decimal lo = Decimal::from_micros(INT64_MAX / 4), hi = Decimal::from_micros(INT64_MIN / 4);
        auto s = q;
        for (std::int64_t x = 0; x <= 6'000'000; x += 1'000) {
            s[who] = Decimal::from_micros(x);
            const Decimal v = compute_fixing(s, cfg).raw_mean;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        EXPECT_EQ(env.min_fixing, lo);
        EXPECT_EQ(env.max_fixing, hi);
    }
}
