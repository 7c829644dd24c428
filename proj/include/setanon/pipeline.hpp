// SPDX-FileCopyrightText: © 2026 The setanon Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "setanon/core.hpp"
#include "setanon/flip.hpp"
#include "setanon/greedy.hpp"
#include "setanon/kgroup.hpp"
#include "setanon/minhash.hpp"
#include "setanon/oracle.hpp"
#include "setanon/parallel.hpp"
#include "setanon/querylog.hpp"
#include "setanon/threader.hpp"

namespace setanon {

// Per-cluster anonymizer. `oracle` solves clusters of up to
// kOracleMaxRecords threads exactly and falls back to greedy above that.
enum class Algorithm { Greedy, Cluster, Oracle };

inline std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Greedy: return "greedy";
        case Algorithm::Cluster: return "cluster";
        case Algorithm::Oracle: return "oracle";
    }
    return "greedy";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
    if (s == "greedy") return Algorithm::Greedy;
    if (s == "cluster") return Algorithm::Cluster;
    if (s == "oracle") return Algorithm::Oracle;
    return std::nullopt;
}

inline constexpr std::uint64_t kDefaultSeed = 1;

struct PipelineConfig {
    std::size_t k = 2;
    Algorithm algorithm = Algorithm::Greedy;
    std::uint64_t seed = kDefaultSeed;
    std::size_t p = 3;
    std::size_t keyword_p = 2;
    ThreaderParams threader;
    bool enforce_distinct_users = true;
    std::size_t workers = 1;  // never changes the output

    MinHashConfig minhash() const { return MinHashConfig::make(seed, p, keyword_p); }
};

struct PipelineReport {
    std::size_t k = 0;
    std::size_t rows_read = 0;
    std::size_t rows_skipped = 0;
    std::size_t sessions = 0;
    std::size_t queries_in = 0;
    std::size_t threads_total = 0;
    std::size_t clusters_total = 0;
    std::size_t clusters_undersized = 0;
    std::size_t largest_cluster = 0;
    std::size_t threads_deleted = 0;          // in undersized clusters
    std::size_t deleted_thread_keywords = 0;  // LSH values of those threads
    std::size_t additions = 0;
    std::size_t deletions = 0;
    std::size_t threads_emptied = 0;  // every keyword deleted by edits
    std::size_t threads_out = 0;
    std::size_t queries_out = 0;
    std::size_t user_merges = 0;       // blocks merged for distinct users
    std::size_t oracle_fallbacks = 0;  // clusters too large for the oracle

    std::size_t edit_cost() const { return additions + deletions; }
    std::size_t total_cost() const { return additions + deletions + deleted_thread_keywords; }
};

struct OutputRow {
    std::uint64_t thread_id = 0;
    std::string query;
    std::string time_text;
    std::int64_t timestamp = 0;
};

struct PipelineResult {
    std::vector<OutputRow> rows;  // sorted by (thread_id, timestamp)
    PipelineReport report;
};

class VerificationError : public Error {
public:
    using Error::Error;
};

inline std::string format_thread_id(std::uint64_t id) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(id));
    return buf;
}

// The keyword-LSH set of a piece of text: keyword_lsh of every normalized token.
inline std::vector<std::uint64_t> keyword_hash_set(const std::vector<std::string>& keywords, const MinHashConfig& cfg) {
    std::vector<std::uint64_t> out;
    out.reserve(keywords.size());
    for (const auto& w : keywords) out.push_back(keyword_lsh(w, cfg));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Thread-level check on emitted rows: every thread's keyword-LSH set must be
// shared by at least k threads in total. `owner` optionally maps a thread
// id to its user, in which case those k threads must have k distinct owners.
// Returns the ids of violating threads, empty when the output is k-anonymous.
inline std::vector<std::uint64_t> find_violations(
    const std::vector<OutputRow>& rows, std::size_t k, const MinHashConfig& cfg,
    const std::unordered_map<std::uint64_t, std::string>* owner = nullptr) {
    std::map<std::uint64_t, std::set<std::string>> keywords;
    for (const auto& r : rows) {
        auto& ks = keywords[r.thread_id];
        for (auto& w : normalize(r.query)) ks.insert(std::move(w));
    }
    std::map<std::vector<std::uint64_t>, std::vector<std::uint64_t>> classes;
    for (const auto& [id, ks] : keywords) {
        classes[keyword_hash_set(std::vector<std::string>(ks.begin(), ks.end()), cfg)].push_back(id);
    }
    std::vector<std::uint64_t> bad;
    for (const auto& [set, ids] : classes) {
        std::size_t support = ids.size();
        if (owner) {
            std::set<std::string> users;
            for (auto id : ids) users.insert(owner->at(id));
            support = users.size();
        }
        if (support < k) bad.insert(bad.end(), ids.begin(), ids.end());
    }
    std::sort(bad.begin(), bad.end());
    return bad;
}

inline void write_output(std::ostream& out, const std::vector<OutputRow>& rows) {
    for (const auto& r : rows) out << format_thread_id(r.thread_id) << '\t' << r.query << '\t' << r.time_text << '\n';
}

// Reads `thread_id<TAB>query<TAB>timestamp` lines as written by write_output.
// Thread ids are opaque here; they are re-keyed in first-seen order.
inline std::vector<OutputRow> read_output(std::istream& in) {
    std::vector<OutputRow> rows;
    std::map<std::string, std::uint64_t> ids;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (detail::trim(view).empty()) continue;
        const auto fields = detail::split_tabs(view);
        if (fields.size() < 3) throw Error("line " + std::to_string(number) + ": expected three tab-separated fields");
        auto [it, fresh] = ids.try_emplace(std::string(fields[0]), ids.size());
        rows.push_back({it->second, std::string(fields[1]), std::string(fields[2]), 0});
    }
    return rows;
}

namespace detail {

struct ThreadHashes {
    std::vector<std::uint64_t> hashes;                                  // sorted
    std::unordered_map<std::uint64_t, std::vector<std::string>> words;  // hash -> generating keywords
};

// Outcome of one cluster: for every member thread, the keywords to strip
// and the keywords to append, or deletion of the whole thread.
struct ClusterOutcome {
    bool deleted = false;
    std::size_t deleted_keywords = 0;
    std::size_t additions = 0;
    std::size_t deletions = 0;
    std::size_t user_merges = 0;
    bool oracle_fallback = false;
    std::vector<std::set<std::string>> strip;
    std::vector<std::vector<std::string>> append;
};

inline std::size_t distinct_owners(const std::vector<std::size_t>& block, const std::vector<std::size_t>& owner) {
    std::set<std::size_t> s;
    for (std::size_t i : block) s.insert(owner[i]);
    return s.size();
}

// Merges blocks with fewer than k distinct owners into the block whose
// majority cost grows least, until every block has k owners.
inline std::size_t repair_distinct_owners(Grouping& g, const Dataset& d, const std::vector<std::size_t>& owner,
                                          std::size_t k) {
    std::size_t merges = 0;
    for (;;) {
        g.canonicalize();
        std::size_t weak = g.blocks.size();
        for (std::size_t b = 0; b < g.blocks.size(); ++b) {
            if (distinct_owners(g.blocks[b], owner) < k) {
                weak = b;
                break;
            }
        }
        if (weak == g.blocks.size()) return merges;
        if (g.blocks.size() == 1) throw Error("cluster has fewer than k distinct users");
        std::size_t target = g.blocks.size();
        std::size_t best_growth = 0;
        const std::size_t weak_cost = majority_cost(d, g.blocks[weak]);
        for (std::size_t b = 0; b < g.blocks.size(); ++b) {
            if (b == weak) continue;
            auto merged = g.blocks[b];
            merged.insert(merged.end(), g.blocks[weak].begin(), g.blocks[weak].end());
            const std::size_t growth = majority_cost(d, merged) - majority_cost(d, g.blocks[b]) - weak_cost;
            if (target == g.blocks.size() || growth < best_growth) {
                target = b;
                best_growth = growth;
            }
        }
        g.blocks[target].insert(g.blocks[target].end(), g.blocks[weak].begin(), g.blocks[weak].end());
        g.blocks.erase(g.blocks.begin() + static_cast<std::ptrdiff_t>(weak));
        ++merges;
    }
}

inline ClusterOutcome process_cluster(const std::vector<std::size_t>& members, const std::vector<ThreadHashes>& sets,
                                      const std::vector<std::size_t>& owner_of_thread, const PipelineConfig& cfg,
                                      std::uint64_t cluster_seed) {
    ClusterOutcome out;
    const std::size_t n = members.size();
    out.strip.resize(n);
    out.append.resize(n);

    std::vector<std::size_t> owner(n);
    for (std::size_t i = 0; i < n; ++i) owner[i] = owner_of_thread[members[i]];
    std::vector<std::size_t> everyone(n);
    for (std::size_t i = 0; i < n; ++i) everyone[i] = i;
    const std::size_t support = cfg.enforce_distinct_users ? distinct_owners(everyone, owner) : n;
    if (support < cfg.k) {
        out.deleted = true;
        for (std::size_t t : members) out.deleted_keywords += sets[t].hashes.size();
        return out;
    }
    if (cfg.k <= 1) return out;

    // Local item ids are ranks of the cluster's distinct hash values.
    std::vector<std::uint64_t> universe;
    for (std::size_t t : members) universe.insert(universe.end(), sets[t].hashes.begin(), sets[t].hashes.end());
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
    auto local = [&](std::uint64_t h) {
        return ItemId{static_cast<std::uint32_t>(std::lower_bound(universe.begin(), universe.end(), h) - universe.begin())};
    };
    std::vector<RecordSet> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<ItemId> items;
        for (std::uint64_t h : sets[members[i]].hashes) items.push_back(local(h));
        records.emplace_back(std::to_string(i), std::move(items));
    }
    const Dataset d(std::move(records), universe.size());

    Grouping g;
    switch (cfg.algorithm) {
        case Algorithm::Oracle:
            if (n <= kOracleMaxRecords) {
                if (cfg.enforce_distinct_users) {
                    g = optimal_flip_if(d, cfg.k, [&](const std::vector<std::size_t>& b) {
                            return distinct_owners(b, owner) >= cfg.k;
                        }).grouping;
                } else {
                    g = optimal_flip(d, cfg.k).grouping;
                }
                break;
            }
            out.oracle_fallback = true;
            g = greedy_anonymize(d, cfg.k).grouping;
            break;
        case Algorithm::Greedy:
            g = greedy_anonymize(d, cfg.k).grouping;
            break;
        case Algorithm::Cluster:
            g = kgroup_solve(d, cfg.k, cluster_seed).state.grouping();
            break;
    }
    if (cfg.enforce_distinct_users) out.user_merges = repair_distinct_owners(g, d, owner, cfg.k);

    const EditScript script = anonymize_grouping(d, g);
    out.additions = script.additions();
    out.deletions = script.deletions();

    // Added keyword for a hash: the generator used by the most threads of
    // the cluster, ties to the lexicographically smallest.
    std::map<std::uint64_t, std::string> chosen;
    for (const auto& e : script.edits) {
        if (e.op != EditOp::Add || chosen.count(universe[e.item.value])) continue;
        const std::uint64_t h = universe[e.item.value];
        std::map<std::string, std::size_t> votes;
        for (std::size_t t : members) {
            auto it = sets[t].words.find(h);
            if (it == sets[t].words.end()) continue;
            for (const auto& w : it->second) ++votes[w];
        }
        std::string best;
        std::size_t best_votes = 0;
        for (const auto& [w, v] : votes) {
            if (v > best_votes) {
                best = w;
                best_votes = v;
            }
        }
        chosen[h] = best;
    }
    for (const auto& e : script.edits) {
        const std::uint64_t h = universe[e.item.value];
        if (e.op == EditOp::Delete) {
            const auto& words = sets[members[e.record]].words.at(h);
            out.strip[e.record].insert(words.begin(), words.end());
        } else {
            out.append[e.record].push_back(chosen.at(h));
        }
    }
    for (auto& a : out.append) std::sort(a.begin(), a.end());
    return out;
}

// Query text after stripping keywords; unchanged queries keep their text.
inline std::string rewrite_query(const std::string& raw, const std::set<std::string>& strip,
                                 const std::vector<std::string>& append) {
    const auto tokens = tokenize(raw);
    bool touched = !append.empty();
    for (const auto& t : tokens) touched = touched || strip.count(t) > 0;
    if (!touched) return std::string(trim(raw));
    std::string out;
    for (const auto& t : tokens) {
        if (strip.count(t)) continue;
        if (!out.empty()) out += ' ';
        out += t;
    }
    for (const auto& w : append) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

}  // namespace detail

// End-to-end anonymization of a query log. Throws VerificationError rather
// than return output that is not k-anonymous at thread level.
inline PipelineResult run(const QueryLog& log, const PipelineConfig& cfg) {
    if (cfg.k == 0) throw std::invalid_argument("k must be at least 1");
    const MinHashConfig mh = cfg.minhash();
    PipelineResult result;
    auto& rep = result.report;
    rep.k = cfg.k;
    rep.rows_read = log.rows_read;
    rep.rows_skipped = log.rows_skipped;
    rep.sessions = log.sessions.size();
    rep.queries_in = log.query_count();

    const std::vector<Thread> threads = segment_log(log, cfg.threader, cfg.seed);
    rep.threads_total = threads.size();

    // Thread owners as dense indices.
    std::map<std::string, std::size_t> user_index;
    std::vector<std::size_t> owner(threads.size());
    for (std::size_t t = 0; t < threads.size(); ++t) {
        owner[t] = user_index.try_emplace(threads[t].user_id, user_index.size()).first->second;
    }

    std::unordered_map<std::string, std::uint64_t> hash_of;
    std::vector<detail::ThreadHashes> sets(threads.size());
    for (std::size_t t = 0; t < threads.size(); ++t) {
        for (const auto& w : threads[t].keywords) {
            auto it = hash_of.find(w);
            if (it == hash_of.end()) it = hash_of.emplace(w, keyword_lsh(w, mh)).first;
            sets[t].hashes.push_back(it->second);
            sets[t].words[it->second].push_back(w);
        }
        auto& hs = sets[t].hashes;
        std::sort(hs.begin(), hs.end());
        hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
    }

    std::vector<std::vector<std::uint64_t>> thread_sets;
    thread_sets.reserve(threads.size());
    for (const auto& s : sets) thread_sets.push_back(s.hashes);
    const auto clusters = cluster_by_lsh(thread_sets, mh);
    rep.clusters_total = clusters.size();

    std::vector<detail::ClusterOutcome> outcomes(clusters.size());
    parallel_for(clusters.size(), cfg.workers, [&](std::size_t c) {
        outcomes[c] = detail::process_cluster(clusters[c], sets, owner, cfg, mix(cfg.seed, c));
    });

    std::unordered_map<std::uint64_t, std::string> owner_of_id;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        const auto& oc = outcomes[c];
        rep.largest_cluster = std::max(rep.largest_cluster, clusters[c].size());
        if (oc.deleted) {
            ++rep.clusters_undersized;
            rep.threads_deleted += clusters[c].size();
            rep.deleted_thread_keywords += oc.deleted_keywords;
            continue;
        }
        rep.additions += oc.additions;
        rep.deletions += oc.deletions;
        rep.user_merges += oc.user_merges;
        rep.oracle_fallbacks += oc.oracle_fallback ? 1 : 0;
        for (std::size_t i = 0; i < clusters[c].size(); ++i) {
            const Thread& th = threads[clusters[c][i]];
            std::size_t emitted = 0;
            for (std::size_t qi = 0; qi < th.queries.size(); ++qi) {
                const auto& q = th.queries[qi];
                std::string text = detail::rewrite_query(q.raw_query, oc.strip[i],
                                                         qi == 0 ? oc.append[i] : std::vector<std::string>{});
                if (normalize(text).empty()) continue;
                result.rows.push_back({th.thread_id, std::move(text), q.time_text, q.timestamp});
                ++emitted;
            }
            if (emitted == 0) {
                ++rep.threads_emptied;
            } else {
                ++rep.threads_out;
                owner_of_id[th.thread_id] = th.user_id;
            }
            rep.queries_out += emitted;
        }
    }
    std::stable_sort(result.rows.begin(), result.rows.end(), [](const OutputRow& a, const OutputRow& b) {
        return a.thread_id != b.thread_id ? a.thread_id < b.thread_id : a.timestamp < b.timestamp;
    });

    const auto bad = find_violations(result.rows, cfg.k, mh, cfg.enforce_distinct_users ? &owner_of_id : nullptr);
    if (!bad.empty()) {
        throw VerificationError("output is not " + std::to_string(cfg.k) + "-anonymous: thread " +
                                format_thread_id(bad.front()) + " and " + std::to_string(bad.size() - 1) +
                                " others lack support");
    }
    return result;
}

// One run per k with the same seed and settings.
inline std::vector<PipelineReport> sweep(const QueryLog& log, PipelineConfig cfg, const std::vector<std::size_t>& ks) {
    if (ks.empty()) throw std::invalid_argument("k list must not be empty");
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] == 0 || (i > 0 && ks[i] <= ks[i - 1])) {
            throw std::invalid_argument("k list must be positive and strictly ascending");
        }
    }
    std::vector<PipelineReport> rows;
    for (std::size_t k : ks) {
        cfg.k = k;
        rows.push_back(run(log, cfg).report);
    }
    return rows;
}

}  // namespace setanon
