// SPDX-FileCopyrightText: © 2026 The setanon Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sstream>

#include "setanon/core.hpp"
#include "setanon/io.hpp"
#include "test_support.hpp"

namespace setanon {
namespace {

using testing::index_of;
using testing::load_set_data;

ItemId item(const SetData& s, const std::string& name) { return *s.items.find(name); }

TEST(KAnonymity, AnonymizedBasketsAreTwoAnonymous) {
    auto data = load_set_data("five_baskets_k2.tsv");
    EXPECT_TRUE(is_k_anonymous(data.dataset, 2));
    EXPECT_FALSE(is_k_anonymous(data.dataset, 3));
}

TEST(KAnonymity, OriginalBasketsAreNot) {
    auto data = load_set_data("five_baskets.tsv");
    EXPECT_FALSE(is_k_anonymous(data.dataset, 2));
    EXPECT_TRUE(is_k_anonymous(data.dataset, 1));
}

TEST(KAnonymity, RecordIdsAreIgnored) {
    auto data = testing::parse_set_data("a\tx y\nb\ty x\n");
    EXPECT_TRUE(is_k_anonymous(data.dataset, 2));
}

TEST(KAnonymity, RejectsZeroK) {
    auto data = load_set_data("five_baskets.tsv");
    EXPECT_THROW(is_k_anonymous(data.dataset, 0), std::invalid_argument);
}

TEST(Hamming, Examples) {
    auto data = load_set_data("five_baskets.tsv");
    const auto& d = data.dataset;
    EXPECT_EQ(hamming(d[0], d[1]), 1u);
    EXPECT_EQ(hamming(d[0], d[0]), 0u);
    EXPECT_EQ(hamming(d[0], d[4]), 5u);  // disjoint, sizes 3 and 2
}

TEST(Hamming, IsAMetric) {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        Dataset d = testing::random_dataset(rng, 3, 12, true);
        const auto ab = hamming(d[0], d[1]), ba = hamming(d[1], d[0]);
        const auto bc = hamming(d[1], d[2]), ac = hamming(d[0], d[2]);
        EXPECT_EQ(ab, ba);
        EXPECT_EQ(ab == 0, d[0].items == d[1].items);
        EXPECT_LE(ac, ab + bc);
    }
}

TEST(ApplyEdits, ReproducesTheTwoAnonymousTransformation) {
    auto data = load_set_data("five_baskets.tsv");
    const auto& d = data.dataset;
    EditScript s;
    s.edits = {{index_of(d, "S2"), item(data, "e3"), EditOp::Add},
               {index_of(d, "S3"), item(data, "e2"), EditOp::Add},
               {index_of(d, "S4"), item(data, "e6"), EditOp::Delete}};
    Dataset out = apply_edits(d, s);
    std::ostringstream os;
    write_set_data(os, out, data.items);
    EXPECT_EQ(os.str(), "S1\te1 e2 e3\nS2\te1 e2 e3\nS3\te1 e2 e3\nS4\te4 e5\nS5\te4 e5\n");
    EXPECT_TRUE(is_k_anonymous(out, 2));
    EXPECT_EQ(s.additions(), 2u);
    EXPECT_EQ(s.deletions(), 1u);
}

TEST(ApplyEdits, EmptyScriptIsIdentity) {
    auto data = load_set_data("five_baskets.tsv");
    EXPECT_EQ(apply_edits(data.dataset, {}), data.dataset);
}

TEST(ApplyEdits, RejectsDuplicatePair) {
    auto data = load_set_data("five_baskets.tsv");
    EditScript s;
    s.edits = {{1, item(data, "e3"), EditOp::Add}, {1, item(data, "e3"), EditOp::Delete}};
    try {
        apply_edits(data.dataset, s);
        FAIL() << "expected InvalidEditError";
    } catch (const InvalidEditError& e) {
        EXPECT_EQ(e.position(), 1u);
        EXPECT_EQ(e.edit(), s.edits[1]);
    }
}

TEST(ApplyEdits, RejectsAddOfPresentAndDeleteOfAbsent) {
    auto data = load_set_data("five_baskets.tsv");
    EditScript add;
    add.edits = {{0, item(data, "e1"), EditOp::Add}};
    EXPECT_THROW(apply_edits(data.dataset, add), InvalidEditError);
    EditScript del;
    del.edits = {{1, item(data, "e3"), EditOp::Delete}};
    EXPECT_THROW(apply_edits(data.dataset, del), InvalidEditError);
    EditScript range;
    range.edits = {{99, item(data, "e3"), EditOp::Delete}};
    EXPECT_THROW(apply_edits(data.dataset, range), InvalidEditError);
}

TEST(ApplyEdits, ReversedScriptRestoresInput) {
    SplitMix64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        Dataset d = testing::random_dataset(rng, 6, 8);
        EditScript s;
        for (std::size_t i = 0; i < d.size(); ++i) {
            for (std::uint32_t j = 0; j < 8; ++j) {
                if (uniform_index(rng, 4) == 0) {
                    const ItemId it{j};
                    s.edits.push_back({i, it, d[i].contains(it) ? EditOp::Delete : EditOp::Add});
                }
            }
        }
        Dataset edited = apply_edits(d, s);
        EXPECT_EQ(apply_edits(edited, s.reversed()), d);
    }
}

TEST(SuppressionCost, StarredExample) {
    auto data = load_set_data("six_rows.tsv");
    const auto& d = data.dataset;
    SuppressionSolution s;
    s.grouping = testing::grouping_of(d, {{"S1", "S4", "S5"}, {"S2", "S3", "S6"}});
    s.suppressed = {{item(data, "e2")}, {item(data, "e1")}};
    EXPECT_EQ(suppression_cost(d, s), 6u);
}

TEST(SuppressionCost, UniformBlocksCostNothing) {
    auto data = testing::parse_set_data("a\tx\nb\tx\nc\ty z\nd\tz y\n");
    SuppressionSolution s;
    s.grouping.blocks = {{0, 1}, {2, 3}};
    s.suppressed = {{}, {}};
    EXPECT_EQ(suppression_cost(data.dataset, s), 0u);
}

TEST(SuppressionCost, FiveByTwo) {
    auto data = testing::parse_set_data("a\tx\nb\tx y\nc\tx\nd\tx z\ne\tx\n");
    SuppressionSolution s;
    s.grouping.blocks = {{0, 1, 2, 3, 4}};
    s.suppressed = {{*data.items.find("y"), *data.items.find("z")}};
    EXPECT_EQ(suppression_cost(data.dataset, s), 10u);
}

TEST(SuppressionCost, InfeasibleNamesBlockAndColumn) {
    auto data = load_set_data("six_rows.tsv");
    const auto& d = data.dataset;
    SuppressionSolution s;
    s.grouping = testing::grouping_of(d, {{"S1", "S4", "S5"}, {"S2", "S3", "S6"}});
    s.suppressed = {{item(data, "e2")}, {}};
    try {
        suppression_cost(d, s);
        FAIL() << "expected InfeasibleError";
    } catch (const InfeasibleError& e) {
        EXPECT_EQ(e.block(), 1u);
        EXPECT_EQ(e.column(), item(data, "e1"));
    }
}

TEST(Grouping, ValidateCatchesProblems) {
    Grouping g;
    g.blocks = {{0, 1}, {2}};
    EXPECT_NO_THROW(g.validate(3, 1));
    EXPECT_THROW(g.validate(3, 2), Error);
    g.blocks = {{0, 1}, {1, 2}};
    EXPECT_THROW(g.validate(3, 1), Error);
    g.blocks = {{0, 1}};
    EXPECT_THROW(g.validate(3, 1), Error);
}

TEST(SetDataIo, ReadRejectsEmptyRecordsUnlessAllowed) {
    std::istringstream in("a\tx\nb\t\n");
    EXPECT_THROW(read_set_data(in), Error);
    std::istringstream again("a\tx\nb\t\n");
    auto data = read_set_data(again, true);
    EXPECT_TRUE(data.dataset[1].empty());
}

TEST(SetDataIo, DuplicateIdsRejected) {
    std::istringstream in("a\tx\na\ty\n");
    EXPECT_THROW(read_set_data(in), Error);
}

TEST(SetDataIo, WriteSortsItemsByName) {
    auto data = testing::parse_set_data("r\tzeta alpha alpha mid\n");
    std::ostringstream os;
    write_set_data(os, data.dataset, data.items);
    EXPECT_EQ(os.str(), "r\talpha mid zeta\n");
}

}  // namespace
}  // namespace setanon
