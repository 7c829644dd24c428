// SPDX-FileCopyrightText: © 2026 The setanon Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "setanon/threader.hpp"
#include "test_support.hpp"

namespace setanon {
namespace {

QueryLog load_log(const std::string& name) {
    std::ifstream in(testing::data_path(name));
    if (!in) throw std::runtime_error("missing fixture " + name);
    return read_query_log(in);
}

std::vector<QueryEvent> session_of(const std::vector<std::string>& queries) {
    std::vector<QueryEvent> out;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        out.push_back({"u", static_cast<std::int64_t>(1000 + 60 * i), "", queries[i]});
    }
    return out;
}

TEST(Normalize, Examples) {
    EXPECT_EQ(normalize("pine straw lilburn delivery"),
              (std::vector<std::string>{"delivery", "lilburn", "pine", "straw"}));
    EXPECT_EQ(normalize("A  a"), std::vector<std::string>{"a"});
    EXPECT_EQ(normalize("jarrett t. arnold"), (std::vector<std::string>{"arnold", "jarrett", "t"}));
    EXPECT_EQ(normalize("pine straw in lilburn ga."), (std::vector<std::string>{"ga", "in", "lilburn", "pine", "straw"}));
    EXPECT_TRUE(normalize("...").empty());
}

TEST(Levenshtein, Examples) {
    EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
    EXPECT_EQ(levenshtein("", "abc"), 3u);
    EXPECT_EQ(levenshtein("atlant humane society", "atlanta humane society"), 1u);
    EXPECT_EQ(levenshtein("same", "same"), 0u);
}

TEST(Similar, Examples) {
    EXPECT_TRUE(similar("atlant humane society", "atlanta humane society", 0.34, 0.2));
    EXPECT_TRUE(similar("effects of nicotine", "effects of nicotine", 0.34, 0.2));
    EXPECT_FALSE(similar("effects of nicotine", "jarrett arnold", 0.34, 0.2));
    EXPECT_THROW(similar("a", "b", 1.5, 0.2), std::invalid_argument);
    EXPECT_THROW(similar("a", "b", 0.3, -0.1), std::invalid_argument);
}

TEST(Similar, JaccardDisjunct) {
    // Edit distance is large; keyword overlap 1 of 5 = 0.2.
    EXPECT_TRUE(similar("dekalb animal shelter", "dekalb humane society", 0.34, 0.2));
    EXPECT_FALSE(similar("dekalb animal shelter", "dekalb humane society", 0.34, 0.3));
}

TEST(Segment, SingleQuery) {
    ThreadIdSource ids(1);
    auto threads = segment(session_of({"pine straw"}), {}, ids);
    ASSERT_EQ(threads.size(), 1u);
    EXPECT_NE(threads[0].thread_id, 0u);
}

TEST(Segment, IdenticalQueriesOneThread) {
    ThreadIdSource ids(1);
    EXPECT_EQ(segment(session_of({"x y", "x y", "x y", "x y"}), {}, ids).size(), 1u);
}

TEST(Segment, UnorderedInputRejected) {
    auto s = session_of({"a", "b"});
    std::swap(s[0].timestamp, s[1].timestamp);
    ThreadIdSource ids(1);
    EXPECT_THROW(segment(s, {}, ids), std::invalid_argument);
}

TEST(Segment, SampleSessionFourTopics) {
    const auto log = load_log("lilburn_session.tsv");
    ASSERT_EQ(log.sessions.size(), 1u);
    EXPECT_EQ(log.query_count(), 19u);
    const auto threads = segment_log(log, {}, 1);
    ASSERT_EQ(threads.size(), 4u);
    std::vector<std::size_t> sizes;
    for (const auto& t : threads) sizes.push_back(t.queries.size());
    EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 8, 3, 5}));
    EXPECT_EQ(threads[0].queries[0].raw_query, "pine straw lilburn delivery");
    EXPECT_EQ(threads[2].queries[1].raw_query, "effects of nicotine");
    EXPECT_EQ(threads[3].keywords,
              (std::vector<std::string>{"and", "arnold", "eugene", "jarrett", "jaylene", "or", "oregon", "t"}));
}

TEST(Segment, StricterJaccardSplitsShelters) {
    const auto log = load_log("lilburn_session.tsv");
    ThreaderParams p;
    p.jaccard_threshold = 0.3;
    EXPECT_EQ(segment_log(log, p, 1).size(), 5u);
}

TEST(Segment, MergePassJoinsAdjacentThreads) {
    // "a b c d" is similar to both earlier queries but joins only the most
    // recent one; the merge pass then links the two threads.
    ThreaderParams p;
    p.edit_threshold = 0.0;
    p.jaccard_threshold = 0.5;
    const auto s = session_of({"a b", "c d", "a b c d"});
    auto one_round = p;
    one_round.max_rounds = 1;
    ThreadIdSource ids1(3), ids2(3);
    const auto first_pass = segment(s, one_round, ids1);
    ASSERT_EQ(first_pass.size(), 2u);
    EXPECT_EQ(first_pass[1].queries.size(), 2u);
    EXPECT_EQ(segment(s, p, ids2).size(), 1u);
}

TEST(Segment, ExtraSimilarityHook) {
    ThreaderParams p;
    p.edit_threshold = 0.0;
    p.jaccard_threshold = 0.5;
    p.extra = [](std::string_view x, std::string_view y) {
        return (x == "a b" && y == "c d") || (x == "c d" && y == "a b");
    };
    ThreadIdSource ids(3);
    EXPECT_EQ(segment(session_of({"a b", "q r", "c d"}), p, ids).size(), 2u);
}

TEST(Segment, InvariantsOnRandomSessions) {
    SplitMix64 rng(12);
    const std::vector<std::string> words = {"pine", "straw", "mulch", "dog", "cat", "shelter", "nicotine", "effects"};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> qs;
        const std::size_t n = 1 + uniform_index(rng, 15);
        for (std::size_t i = 0; i < n; ++i) {
            std::string q;
            const std::size_t len = 1 + uniform_index(rng, 3);
            for (std::size_t w = 0; w < len; ++w) q += (w ? " " : "") + words[uniform_index(rng, words.size())];
            qs.push_back(q);
        }
        const auto session = session_of(qs);
        ThreadIdSource a(trial), b(trial);
        const auto t1 = segment(session, {}, a), t2 = segment(session, {}, b);
        ASSERT_EQ(t1.size(), t2.size());
        std::multiset<std::string> seen;
        std::set<std::string> all_keywords, thread_keywords;
        for (std::size_t i = 0; i < t1.size(); ++i) {
            EXPECT_EQ(t1[i].thread_id, t2[i].thread_id);
            EXPECT_FALSE(t1[i].queries.empty());
            for (std::size_t q = 1; q < t1[i].queries.size(); ++q) {
                EXPECT_LE(t1[i].queries[q - 1].timestamp, t1[i].queries[q].timestamp);
            }
            for (const auto& q : t1[i].queries) seen.insert(q.raw_query + "@" + std::to_string(q.timestamp));
            thread_keywords.insert(t1[i].keywords.begin(), t1[i].keywords.end());
        }
        EXPECT_EQ(seen.size(), n);
        for (const auto& q : session) {
            EXPECT_EQ(seen.count(q.raw_query + "@" + std::to_string(q.timestamp)), 1u);
            for (auto& k : normalize(q.raw_query)) all_keywords.insert(k);
        }
        EXPECT_EQ(thread_keywords, all_keywords);
    }
}

TEST(QueryLogIo, SkipsBadRowsAndHeader) {
    std::istringstream in(
        "AnonID\tQuery\tQueryTime\n"
        "7\tfoo bar\t2006-03-01 10:00:00\t1\thttp://x\n"
        "7\t\t2006-03-01 10:00:00\n"
        "8\tbaz\tnot a time\n"
        "8\tonly two fields\n"
        "5\tearly\t2006-03-01 09:00:00\n"
        "7\tfirst\t2006-03-01 09:59:59\n");
    const auto log = read_query_log(in);
    EXPECT_EQ(log.rows_read, 6u);
    EXPECT_EQ(log.rows_skipped, 3u);
    ASSERT_EQ(log.sessions.size(), 2u);
    EXPECT_EQ(log.sessions[0].user_id, "5");
    EXPECT_EQ(log.sessions[1].queries[0].raw_query, "first");
    EXPECT_EQ(log.sessions[1].queries[1].time_text, "2006-03-01 10:00:00");
}

TEST(QueryLogIo, TimestampParsing) {
    EXPECT_EQ(parse_timestamp("1970-01-01 00:00:00"), 0);
    EXPECT_EQ(parse_timestamp("2006-03-01 09:12:05"), 1141204325);
    EXPECT_FALSE(parse_timestamp("2006-02-30 00:00:00"));
    EXPECT_FALSE(parse_timestamp("2006-03-01T09:12:05"));
}

}  // namespace
}  // namespace setanon
