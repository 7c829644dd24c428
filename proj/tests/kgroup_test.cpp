// SPDX-FileCopyrightText: © 2026 The setanon Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "setanon/kgroup.hpp"
#include "setanon/oracle.hpp"
#include "test_support.hpp"

namespace setanon {
namespace {

using testing::index_of;
using testing::load_set_data;

double objective(const Dataset& d, const std::vector<std::size_t>& open, double f) {
    double total = f * static_cast<double>(open.size());
    for (const auto& r : d.records()) {
        std::size_t best = std::numeric_limits<std::size_t>::max();
        for (std::size_t c : open) best = std::min(best, hamming(r, d[c]));
        total += static_cast<double>(best);
    }
    return total;
}

TEST(LocalSearch, TwoClumpsOpenTwoFacilities) {
    auto data = testing::parse_set_data("a\tx y\nb\tx y\nc\tx y\nd\tp q r\ne\tp q r\nf\tp q r\n");
    auto s = local_search_fl(data.dataset, 0.5, {});
    EXPECT_EQ(s.open.size(), 2u);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(hamming(data.dataset[i], data.dataset[s.assignment[i]]), 0u);
}

TEST(LocalSearch, ExpensiveFacilitiesCollapseToOne) {
    auto data = load_set_data("five_baskets.tsv");
    const auto& d = data.dataset;
    std::size_t total = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = i + 1; j < d.size(); ++j) total += hamming(d[i], d[j]);
    }
    LocalSearchOptions opts;
    opts.initial_facilities = 4;
    auto s = local_search_fl(d, static_cast<double>(total) + 1.0, opts);
    EXPECT_EQ(s.open.size(), 1u);
}

TEST(LocalSearch, FiveBasketsMatchesEnumeratedOptimum) {
    auto data = load_set_data("five_baskets.tsv");
    const auto& d = data.dataset;
    const double f = 2.0;
    double best = std::numeric_limits<double>::max();
    for (std::uint32_t mask = 1; mask < 32; ++mask) {
        std::vector<std::size_t> open;
        for (std::size_t i = 0; i < 5; ++i) {
            if (mask & (1u << i)) open.push_back(i);
        }
        best = std::min(best, objective(d, open, f));
    }
    EXPECT_DOUBLE_EQ(best, 7.0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        LocalSearchOptions opts;
        opts.seed = seed;
        auto s = local_search_fl(d, f, opts);
        EXPECT_DOUBLE_EQ(objective(d, s.open, f), best);
        ASSERT_EQ(s.open.size(), 2u);
        EXPECT_LE(s.open[0], index_of(d, "S3"));
        EXPECT_GE(s.open[1], index_of(d, "S4"));
    }
}

TEST(LocalSearch, RejectsBadArguments) {
    auto data = load_set_data("five_baskets.tsv");
    EXPECT_THROW(local_search_fl(data.dataset, 0.0), std::invalid_argument);
    EXPECT_THROW(local_search_fl(Dataset{}, 1.0), std::invalid_argument);
}

TEST(RepairMinLoad, FeasibleStateUnchanged) {
    auto data = load_set_data("five_baskets.tsv");
    FacilityState s;
    s.open = {0, 3};
    s.assignment = {0, 0, 0, 3, 3};
    auto r = repair_min_load(s, data.dataset, 2);
    EXPECT_EQ(r.open, s.open);
    EXPECT_EQ(r.assignment, s.assignment);
}

TEST(RepairMinLoad, NEqualsKCollapses) {
    auto data = testing::parse_set_data("a\tx\nb\ty\n");
    FacilityState s;
    s.open = {0, 1};
    s.assignment = {0, 1};
    auto r = repair_min_load(s, data.dataset, 2);
    EXPECT_EQ(r.open.size(), 1u);
    EXPECT_EQ(r.assignment[0], r.assignment[1]);
}

TEST(RepairMinLoad, ClosesLightestFacility) {
    auto data = load_set_data("five_baskets.tsv");
    const auto& d = data.dataset;
    FacilityState s;
    s.open = {0, 2, 3};
    s.assignment = {0, 0, 2, 3, 3};
    auto r = repair_min_load(s, d, 2);
    EXPECT_EQ(r.open, (std::vector<std::size_t>{0, 3}));
    EXPECT_EQ(r.assignment, (std::vector<std::size_t>{0, 0, 0, 3, 3}));
    EXPECT_THROW(repair_min_load(s, d, 6), std::invalid_argument);
}

TEST(RepairMinLoad, NeverOpensAndTerminates) {
    SplitMix64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 2 + uniform_index(rng, 3);
        Dataset d = testing::random_dataset(rng, k + uniform_index(rng, 12), 6);
        LocalSearchOptions opts;
        opts.seed = trial;
        opts.initial_facilities = d.size();
        auto raw = local_search_fl(d, 0.5, opts);
        auto fixed = repair_min_load(raw, d, k);
        EXPECT_LE(fixed.open.size(), raw.open.size());
        const auto loads = fixed.loads(d.size());
        for (std::size_t c : fixed.open) EXPECT_GE(loads[c], k);
        fixed.grouping().validate(d.size(), k);
    }
}

TEST(ClusterAnonymize, FiveBaskets) {
    auto data = load_set_data("five_baskets.tsv");
    const auto& d = data.dataset;
    auto r = cluster_anonymize(d, 2, 7);
    EXPECT_EQ(r.cost(), 3u);
    EXPECT_EQ(r.grouping, testing::grouping_of(d, {{"S1", "S2", "S3"}, {"S4", "S5"}}));
    EXPECT_TRUE(is_k_anonymous(r.output, 2));
}

TEST(ClusterAnonymize, IdenticalRecordsOneBlock) {
    auto data = testing::parse_set_data("a\tx y\nb\tx y\nc\tx y\nd\tx y\n");
    auto r = cluster_anonymize(data.dataset, 2, 1);
    EXPECT_EQ(r.cost(), 0u);
    EXPECT_EQ(r.grouping.blocks.size(), 1u);
}

TEST(ClusterAnonymize, RandomInstancesAgainstOracle) {
    SplitMix64 rng(31337);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + uniform_index(rng, 2);
        const std::size_t n = std::max<std::size_t>(k, 4 + uniform_index(rng, 5));
        Dataset d = testing::random_dataset(rng, n, 3 + uniform_index(rng, 4));
        const auto sol = kgroup_solve(d, k, trial);
        const auto g = sol.state.grouping();
        g.validate(n, k);
        // Majority center never loses to the facility's own record.
        for (std::size_t c : sol.state.open) {
            std::vector<std::size_t> block;
            std::size_t discrete = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (sol.state.assignment[i] == c) {
                    block.push_back(i);
                    discrete += hamming(d[i], d[c]);
                }
            }
            EXPECT_LE(majority_cost(d, block), discrete);
            std::size_t best_point = std::numeric_limits<std::size_t>::max();
            for (std::size_t p : block) {
                std::size_t cost = 0;
                for (std::size_t i : block) cost += hamming(d[i], d[p]);
                best_point = std::min(best_point, cost);
            }
            EXPECT_LE(best_point, 2 * majority_cost(d, block));
        }
        auto r = cluster_anonymize(d, k, trial);
        EXPECT_TRUE(is_k_anonymous(r.output, k));
        EXPECT_GE(r.cost(), optimal_flip(d, k).cost);
        EXPECT_EQ(r.cost(), sol.flip_cost);
    }
}

// Best in-block data point as center costs at most twice the majority center.
TEST(DiscreteCenters, WithinFactorTwo) {
    SplitMix64 rng(1);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + uniform_index(rng, 9);
        Dataset d = testing::random_dataset(rng, n, 1 + uniform_index(rng, 10), true);
        std::vector<std::size_t> block(n);
        for (std::size_t i = 0; i < n; ++i) block[i] = i;
        std::size_t best_point = std::numeric_limits<std::size_t>::max();
        for (std::size_t p = 0; p < n; ++p) {
            std::size_t c = 0;
            for (std::size_t i = 0; i < n; ++i) c += hamming(d[i], d[p]);
            best_point = std::min(best_point, c);
        }
        EXPECT_LE(best_point, 2 * majority_cost(d, block));
    }
}

TEST(ClusterAnonymize, DeterministicPerSeed) {
    SplitMix64 rng(9);
    Dataset d = testing::random_dataset(rng, 40, 12);
    auto a = cluster_anonymize(d, 3, 5);
    auto b = cluster_anonymize(d, 3, 5);
    EXPECT_EQ(a.script, b.script);
    EXPECT_EQ(a.grouping, b.grouping);
}

TEST(ClusterAnonymize, SampledSwapsOnLargeInput) {
    SplitMix64 rng(10);
    Dataset d = testing::random_dataset(rng, 300, 10);
    auto r = cluster_anonymize(d, 4, 3);
    r.grouping.validate(d.size(), 4);
    EXPECT_TRUE(is_k_anonymous(r.output, 4));
}

}  // namespace
}  // namespace setanon
