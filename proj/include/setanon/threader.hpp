// SPDX-FileCopyrightText: © 2026 The setanon Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "setanon/hash.hpp"
#include "setanon/minhash.hpp"
#include "setanon/querylog.hpp"

namespace setanon {

// Lowercased tokens in order of appearance, split on ASCII whitespace and
// punctuation. Bytes outside ASCII are kept inside tokens.
inline std::vector<std::string> tokenize(std::string_view raw) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : raw) {
        const auto c = static_cast<unsigned char>(ch);
        const bool separator = c < 0x80 && !((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'));
        if (separator) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

// Sorted, duplicate-free keyword set of a query.
inline std::vector<std::string> normalize(std::string_view raw) {
    auto tokens = tokenize(raw);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    return tokens;
}

// Byte-level edit distance (unit insert, delete, substitute).
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1);
    std::iota(row.begin(), row.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

// Extra similarity test OR-ed into the built-in ones, e.g. overlap of
// search-result lists when a search backend is available.
using QuerySimilarity = std::function<bool(std::string_view, std::string_view)>;

struct ThreaderParams {
    double edit_threshold = 0.34;     // on edit distance / longer length, strict <
    double jaccard_threshold = 0.2;  // on keyword-set Jaccard, >=
    std::size_t max_rounds = 10;      // including the first pass
    QuerySimilarity extra;
};

namespace detail {

inline std::string lowered(std::string_view s) {
    std::string out(trim(s));
    for (auto& ch : out) {
        if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
    return out;
}

inline bool similar_normalized(const std::string& l1, const std::string& l2, const std::vector<std::string>& k1,
                               const std::vector<std::string>& k2, double edit_threshold, double jaccard_threshold) {
    const std::size_t longest = std::max(l1.size(), l2.size());
    if (longest == 0) return true;
    if (static_cast<double>(levenshtein(l1, l2)) < edit_threshold * static_cast<double>(longest)) return true;
    if (k1.empty() && k2.empty()) return false;
    return jaccard(k1, k2) >= jaccard_threshold;
}

}  // namespace detail

// Two queries are similar when their normalized edit distance is below
// edit_threshold or their keyword sets have Jaccard >= jaccard_threshold.
inline bool similar(std::string_view q1, std::string_view q2, double edit_threshold, double jaccard_threshold) {
    if (edit_threshold < 0.0 || edit_threshold > 1.0 || jaccard_threshold < 0.0 || jaccard_threshold > 1.0) {
        throw std::invalid_argument("similarity thresholds must lie in [0, 1]");
    }
    return detail::similar_normalized(detail::lowered(q1), detail::lowered(q2), normalize(q1), normalize(q2),
                                      edit_threshold, jaccard_threshold);
}

// Unique, non-zero pseudorandom 64-bit thread identifiers.
class ThreadIdSource {
public:
    explicit ThreadIdSource(std::uint64_t master_seed)
        : rng_(mix(master_seed, static_cast<std::uint64_t>(SeedStream::ThreadIds))) {}

    std::uint64_t next() {
        for (;;) {
            const std::uint64_t id = rng_();
            if (id != 0 && used_.insert(id).second) return id;
        }
    }

private:
    SplitMix64 rng_;
    std::unordered_set<std::uint64_t> used_;
};

struct Thread {
    std::uint64_t thread_id = 0;
    std::string user_id;  // internal only; never emitted
    std::vector<QueryEvent> queries;
    std::vector<std::string> keywords;  // union of the queries' normalized keywords
};

// Splits one user's time-ordered session into topic threads. First pass:
// a query joins the thread of the most recent earlier query it is similar
// to, otherwise it opens a new thread. Later passes merge threads adjacent
// in time (ordered by first query) that contain a similar query pair,
// until nothing changes or max_rounds passes have run.
inline std::vector<Thread> segment(const std::vector<QueryEvent>& session, const ThreaderParams& params,
                                   ThreadIdSource& ids) {
    for (std::size_t i = 1; i < session.size(); ++i) {
        if (session[i].timestamp < session[i - 1].timestamp) {
            throw std::invalid_argument("session queries are not in time order at position " + std::to_string(i));
        }
    }
    const std::size_t n = session.size();
    std::vector<std::string> lowered(n);
    std::vector<std::vector<std::string>> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        lowered[i] = detail::lowered(session[i].raw_query);
        keys[i] = normalize(session[i].raw_query);
    }
    std::vector<signed char> memo(n <= 4096 ? n * n : 0, -1);
    auto sim = [&](std::size_t a, std::size_t b) {
        if (a > b) std::swap(a, b);
        signed char* slot = memo.empty() ? nullptr : &memo[a * n + b];
        if (slot && *slot >= 0) return *slot == 1;
        bool s = detail::similar_normalized(lowered[a], lowered[b], keys[a], keys[b], params.edit_threshold,
                                            params.jaccard_threshold);
        if (!s && params.extra) s = params.extra(session[a].raw_query, session[b].raw_query);
        if (slot) *slot = s ? 1 : 0;
        return s;
    };

    // Pass one.
    std::vector<std::size_t> thread_of(n);
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t q = 0; q < n; ++q) {
        std::size_t joined = groups.size();
        for (std::size_t j = q; j-- > 0;) {
            if (sim(j, q)) {
                joined = thread_of[j];
                break;
            }
        }
        if (joined == groups.size()) groups.emplace_back();
        groups[joined].push_back(q);
        thread_of[q] = joined;
    }

    // Merge passes; groups stay ordered by their first query.
    for (std::size_t round = 1; round < params.max_rounds; ++round) {
        bool merged = false;
        std::vector<std::vector<std::size_t>> next;
        for (auto& g : groups) {
            if (!next.empty()) {
                auto& prev = next.back();
                bool linked = false;
                for (std::size_t a : prev) {
                    for (std::size_t b : g) {
                        if (sim(a, b)) {
                            linked = true;
                            break;
                        }
                    }
                    if (linked) break;
                }
                if (linked) {
                    prev.insert(prev.end(), g.begin(), g.end());
                    std::sort(prev.begin(), prev.end());
                    merged = true;
                    continue;
                }
            }
            next.push_back(std::move(g));
        }
        groups = std::move(next);
        if (!merged) break;
    }

    std::vector<Thread> threads;
    threads.reserve(groups.size());
    for (const auto& g : groups) {
        Thread t;
        t.thread_id = ids.next();
        t.user_id = session.empty() ? std::string() : session.front().user_id;
        for (std::size_t q : g) {
            t.queries.push_back(session[q]);
            t.keywords.insert(t.keywords.end(), keys[q].begin(), keys[q].end());
        }
        std::sort(t.keywords.begin(), t.keywords.end());
        t.keywords.erase(std::unique(t.keywords.begin(), t.keywords.end()), t.keywords.end());
        threads.push_back(std::move(t));
    }
    return threads;
}

// Segments every session of a log, in session order.
inline std::vector<Thread> segment_log(const QueryLog& log, const ThreaderParams& params, std::uint64_t seed) {
    ThreadIdSource ids(seed);
    std::vector<Thread> all;
    for (const auto& s : log.sessions) {
        auto threads = segment(s.queries, params, ids);
        all.insert(all.end(), std::make_move_iterator(threads.begin()), std::make_move_iterator(threads.end()));
    }
    return all;
}

}  // namespace setanon
