#include <gtest/gtest.h>

#include <thread>

#include "nbsim/content_sim.hpp"
#include "nbsim/generator.hpp"
#include "support/oracles.hpp"

using namespace nbsim;

namespace {

TableData cols(std::vector<std::set<std::string>> columns) {
    TableData t{"t", {}};
    for (std::size_t i = 0; i < columns.size(); ++i) t.columns.push_back(Column{"c" + std::to_string(i), columns[i]});
    return t;
}

}  // namespace

TEST(Tokenize, Examples) {
    EXPECT_EQ(tokenize_code("import pandas as pd"), (TokenSet{"import", "pandas", "as", "pd"}));
    EXPECT_EQ(tokenize_code("x=1"), (TokenSet{"x", "1"}));
    EXPECT_TRUE(tokenize_code("").empty());
    EXPECT_EQ(tokenize_code("a..b\n\n=a"), (TokenSet{"a", "b"}));
    EXPECT_EQ(tokenize_code("a,b c", ","), (TokenSet{"a", "b c"}));
}

TEST(Tokenize, IdempotentOnJoinedTokens) {
    Rng rng(3);
    for (int i = 0; i < 300; ++i) {
        const auto tokens = tokenize_code(oracle::random_source(rng));
        std::string joined;
        for (const auto& t : tokens) joined += t + " ";
        EXPECT_EQ(tokenize_code(joined), tokens);
        EXPECT_EQ(tokens.count(""), 0U);
    }
}

TEST(Jaccard, Examples) {
    const std::set<std::string> a{"import", "pandas", "as", "pd"}, b{"import", "numpy", "as", "np"};
    EXPECT_DOUBLE_EQ(jaccard(a, b), 2.0 / 6.0);
    EXPECT_EQ(jaccard(a, a), 1.0);
    EXPECT_EQ(jaccard(std::set<std::string>{}, std::set<std::string>{"x"}), 0.0);
    EXPECT_EQ(jaccard(std::set<std::string>{}, std::set<std::string>{}), 1.0);
}

TEST(SimCode, Examples) {
    EXPECT_EQ(sim_code("df.head()", "df.head()"), 1.0);
    EXPECT_DOUBLE_EQ(sim_code("import pandas as pd", "import numpy as np"), 1.0 / 3.0);
    EXPECT_EQ(sim_code("a b", "c d"), 0.0);
}

TEST(SimTable, Examples) {
    EXPECT_EQ(sim_table(cols({{"1", "2"}}), cols({{"1", "2"}, {"3"}})), 1.0);
    const auto t = cols({{"1", "2"}, {"x"}, {}});
    EXPECT_EQ(sim_table(t, t), 1.0);
    EXPECT_EQ(sim_table(cols({{"1", "2", "3"}}), cols({{"2", "3", "4"}})), 0.5);
    EXPECT_EQ(sim_table(cols({}), cols({})), 1.0);
    EXPECT_EQ(sim_table(cols({}), cols({{"1"}})), 0.0);
}

TEST(SimTable, GreedyIsNotOptimal) {
    // (a0,b0) and (a1,b0) tie at 2/3; the tie rule takes (a0,b0), leaving (a1,b1) = 0.
    // Pairing a0-b1 (1/2) with a1-b0 (2/3) would do better.
    const auto a = cols({{"1", "3"}, {"1", "5"}});
    const auto b = cols({{"1", "3", "5"}, {"3"}});
    EXPECT_DOUBLE_EQ(sim_table(a, b), (2.0 / 3.0) / 2);
    EXPECT_DOUBLE_EQ(oracle::table_optimal(a, b), (0.5 + 2.0 / 3.0) / 2);
}

TEST(SimTable, LargerDenominator) {
    SimConfig config;
    config.table_denominator = TableDenominator::Larger;
    EXPECT_EQ(sim_table(cols({{"1", "2"}}), cols({{"1", "2"}, {"3"}}), config), 0.5);
}

TEST(SimTable, MatchesGreedyOracleAndBoundedByOptimum) {
    Rng rng(17);
    for (int i = 0; i < 2000; ++i) {
        const auto a = oracle::random_table(rng, 4);
        const auto b = oracle::random_table(rng, 4);
        const double s = sim_table(a, b);
        EXPECT_NEAR(s, oracle::table(a, b), 1e-12);
        EXPECT_LE(s, oracle::table_optimal(a, b) + 1e-12);
    }
}

TEST(SimTableSets, Examples) {
    const auto t1 = cols({{"1", "2"}}), t2 = cols({{"x"}, {"y"}});
    EXPECT_EQ(sim_table_sets({t1}, {t2, t1}), 1.0);
    EXPECT_EQ(sim_table_sets({}, {}), 1.0);
    EXPECT_EQ(sim_table_sets({}, {t1}), 0.0);
    EXPECT_EQ(sim_table_sets({t1, t2}, {t1}), 0.5);
}

TEST(SimTableSets, MatchesOracle) {
    Rng rng(19);
    for (int i = 0; i < 500; ++i) {
        std::vector<TableData> q, n;
        for (std::size_t j = 0, m = rng.between(0, 3); j < m; ++j) q.push_back(oracle::random_table(rng, 3));
        for (std::size_t j = 0, m = rng.between(0, 3); j < m; ++j) n.push_back(oracle::random_table(rng, 3));
        EXPECT_NEAR(sim_table_sets(q, n), oracle::table_sets(q, n), 1e-12);
    }
}

TEST(SimLibrary, Examples) {
    EXPECT_EQ(sim_library({"pandas", "numpy"}, {"pandas", "numpy"}), 1.0);
    EXPECT_EQ(sim_library({"pandas"}, {"numpy"}), 0.0);
    EXPECT_DOUBLE_EQ(sim_library({"pandas", "numpy"}, {"numpy", "sklearn", "pandas"}), 2.0 / 3.0);
}

TEST(SimOutput, Examples) {
    EXPECT_EQ(sim_output(OutputKind::Png, OutputKind::Png), 1.0);
    EXPECT_EQ(sim_output(OutputKind::Png, OutputKind::Text), 0.0);
    EXPECT_EQ(sim_output(OutputKind::DataFrame, OutputKind::DataFrame), 1.0);
    using K = OutputKind;
    EXPECT_EQ(sim_output_multiset({K::Png, K::Text}, {K::Png, K::Text}), 1.0);
    EXPECT_EQ(sim_output_multiset({K::Png}, {K::Text}), 0.0);
    EXPECT_EQ(sim_output_multiset({K::Png, K::Png, K::Text}, {K::Png, K::Text, K::Text}), 0.5);
    EXPECT_EQ(sim_output_multiset({}, {}), 1.0);
}

TEST(MeasureProperties, SymmetryRangeIdentity) {
    Rng rng(23);
    for (int i = 0; i < 2000; ++i) {
        const auto s1 = oracle::random_source(rng), s2 = oracle::random_source(rng);
        const auto t1 = oracle::random_table(rng, 4), t2 = oracle::random_table(rng, 4);
        const auto l1 = oracle::random_libraries(rng), l2 = oracle::random_libraries(rng);
        for (double v : {sim_code(s1, s2), sim_table(t1, t2), sim_library(l1, l2)}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        EXPECT_EQ(sim_code(s1, s2), sim_code(s2, s1));
        EXPECT_EQ(sim_table(t1, t2), sim_table(t2, t1));
        EXPECT_EQ(sim_library(l1, l2), sim_library(l2, l1));
        EXPECT_EQ(sim_code(s1, s1), 1.0);
        EXPECT_EQ(sim_table(t1, t1), 1.0);
        EXPECT_EQ(sim_library(l1, l1), 1.0);
    }
}

TEST(SimCache, SecondLookupHitsAndKeysAreSymmetric) {
    SimCache cache;
    MeasureCounters counters;
    const auto a = hash_code("a b"), b = hash_code("b c");
    auto compute = [&] { return sim_code("a b", "b c", {}, &counters); };
    const double first = cached(MeasureTag::Code, a, b, cache, compute);
    const double second = cached(MeasureTag::Code, a, b, cache, compute);
    const double swapped = cached(MeasureTag::Code, b, a, cache, compute);
    EXPECT_EQ(first, second);
    EXPECT_EQ(first, swapped);
    EXPECT_EQ(counters.code, 1U);
    EXPECT_EQ(cache.hits(), 2U);
    EXPECT_EQ(cache.misses(), 1U);
    // Tags separate measures.
    EXPECT_FALSE(cache.lookup(MeasureTag::Table, a, b));
}

TEST(SimCache, LruEviction) {
    SimCache cache(2);
    const auto h = [](int i) { return hash_code(std::to_string(i)); };
    cache.store(MeasureTag::Code, h(0), h(1), 0.1);
    cache.store(MeasureTag::Code, h(1), h(2), 0.2);
    EXPECT_TRUE(cache.lookup(MeasureTag::Code, h(0), h(1)));  // now most recent
    cache.store(MeasureTag::Code, h(2), h(3), 0.3);
    EXPECT_EQ(cache.size(), 2U);
    EXPECT_FALSE(cache.lookup(MeasureTag::Code, h(1), h(2)));
    EXPECT_EQ(cache.lookup(MeasureTag::Code, h(1), h(0)), 0.1);
}

TEST(SimCache, ConcurrentUse) {
    SimCache cache(64);
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&cache, t] {
            for (int i = 0; i < 2000; ++i) {
                const int x = i % 100;
                const auto a = hash_code(std::to_string(x)), b = hash_code(std::to_string(t));
                // Keys are unordered pairs, so the value must not depend on argument order.
                const double want = (std::min(x, t) * 100 + std::max(x, t)) / 10000.0;
                const double v = cached(MeasureTag::Code, a, b, cache, [want] { return want; });
                ASSERT_EQ(v, want);
            }
        });
    }
    for (auto& th : threads) th.join();
    EXPECT_LE(cache.size(), 64U);
}
