#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ratefix/cluster.hpp"
#include "support/generators.hpp"
#include "support/tree_compare.hpp"

using namespace ratefix;

TEST(Newick, TwoLeafTree) {
    const Dendrogram d = agglomerate(DistanceMatrix({"A", "B"}, {0.25}), Linkage::Ward);
    EXPECT_EQ(to_newick(d), "(A:0.250000,B:0.250000);");
}

TEST(Newick, BranchLengthsAreHeightDifferences) {
    const Dendrogram d({"a", "b", "c"}, {{0, 1, 1.0, 2}, {2, 3, 2.5, 3}});
    EXPECT_EQ(to_newick(d), "(c:2.500000,(a:1.000000,b:1.000000):1.500000);");
}

TEST(Newick, QuotesLabelsWithSpecialCharacters) {
    const Dendrogram d({"DBSD1MO Index", "O'NEIL"}, {{0, 1, 1.0, 2}});
    const std::string text = to_newick(d);
    EXPECT_EQ(text, "('DBSD1MO Index':1.000000,'O''NEIL':1.000000);");
    const auto clusters = treecmp::from_newick(text);
    ASSERT_EQ(clusters.size(), 1u);
    EXPECT_EQ(clusters[0].first, (std::set<std::string>{"DBSD1MO Index", "O'NEIL"}));
}

TEST(Json, MergesArrayVerbatim) {
    const Dendrogram d({"a", "b", "c"}, {{0, 1, 1.0, 2}, {2, 3, 2.0 / 3.0, 3}});
    const auto j = nlohmann::json::parse(to_json(d, Linkage::Single));
    EXPECT_EQ(j["linkage"], "single");
    EXPECT_EQ(j["leaves"].size(), 3u);
    EXPECT_EQ(j["merges"][1]["left"], 2);
    EXPECT_EQ(j["merges"][1]["right"], 3);
    EXPECT_EQ(j["merges"][1]["size"], 3);
    EXPECT_DOUBLE_EQ(j["merges"][1]["height"].get<double>(), 0.666667);
}

TEST(Dot, ListsEveryNodeAndEdge) {
    const Dendrogram d({"a", "b", "c"}, {{0, 1, 1.0, 2}, {2, 3, 2.0, 3}});
    const std::string dot = to_dot(d);
    EXPECT_NE(dot.find("digraph dendrogram"), std::string::npos);
    EXPECT_NE(dot.find("n4 -> n3"), std::string::npos);
    EXPECT_NE(dot.find("label=\"h=2.000000\""), std::string::npos);
    EXPECT_NE(dot.find("label=\"c\""), std::string::npos);
}

TEST(NewickJsonRoundTrip, IndependentReaderAgreesWithMerges) {
    std::mt19937_64 rng(8);
    for (int iter = 0; iter < 200; ++iter) {
        const std::size_t n = 2 + rng() % 12;
        const Linkage l = iter % 2 ? Linkage::Ward : Linkage::Single;
        const Dendrogram d = agglomerate(testgen::to_matrix(testgen::random_matrix(rng, n)), l);
        const auto newick = treecmp::from_newick(to_newick(d));
        const auto merges = treecmp::from_merges_json(to_json(d, l));
        ASSERT_TRUE(treecmp::isomorphic(newick, merges, 1e-5 * static_cast<double>(n)));
    }
}
