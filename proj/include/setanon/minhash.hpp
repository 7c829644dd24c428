// SPDX-FileCopyrightText: © 2026 The setanon Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "setanon/core.hpp"
#include "setanon/hash.hpp"

namespace setanon {

// Seeds for approximate MinHash. `thread_seeds` hash thread-level sets; the
// first p of them form the LSH key. `keyword_seeds` hash a keyword's
// characters. Both are derived from the master seed.
struct MinHashConfig {
    std::uint64_t master_seed = 0;
    std::size_t p = 3;
    std::size_t keyword_p = 2;
    std::vector<std::uint64_t> thread_seeds;
    std::vector<std::uint64_t> keyword_seeds;

    static MinHashConfig make(std::uint64_t master_seed, std::size_t p = 3, std::size_t keyword_p = 2) {
        if (p == 0) throw std::invalid_argument("p must be at least 1");
        if (keyword_p == 0) throw std::invalid_argument("keyword_p must be at least 1");
        MinHashConfig cfg;
        cfg.master_seed = master_seed;
        cfg.p = p;
        cfg.keyword_p = keyword_p;
        cfg.thread_seeds = derive_seeds(master_seed, SeedStream::ThreadMinHash, p);
        cfg.keyword_seeds = derive_seeds(master_seed, SeedStream::KeywordMinHash, keyword_p);
        return cfg;
    }
};

// Concatenation of p MinHash components.
using LshKey = std::vector<std::uint64_t>;

// |a ∩ b| / |a ∪ b| for sorted, duplicate-free sequences; 0 when both are empty.
template <typename T>
double jaccard(std::span<const T> a, std::span<const T> b) {
    std::size_t i = 0, j = 0, common = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            ++common;
            ++i;
            ++j;
        }
    }
    const std::size_t uni = a.size() + b.size() - common;
    return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
}

template <typename T>
double jaccard(const std::vector<T>& a, const std::vector<T>& b) {
    return jaccard(std::span<const T>(a), std::span<const T>(b));
}

inline double jaccard(const RecordSet& a, const RecordSet& b) {
    return jaccard(std::span<const ItemId>(a.items), std::span<const ItemId>(b.items));
}

// Component j is min over elements e of mix(seeds[j], e).
inline std::vector<std::uint64_t> minhash_signature(std::span<const std::uint64_t> elements,
                                                    std::span<const std::uint64_t> seeds) {
    if (elements.empty()) throw std::invalid_argument("cannot MinHash an empty set");
    std::vector<std::uint64_t> sig(seeds.size(), std::numeric_limits<std::uint64_t>::max());
    for (std::uint64_t e : elements) {
        for (std::size_t j = 0; j < seeds.size(); ++j) sig[j] = std::min(sig[j], mix(seeds[j], e));
    }
    return sig;
}

inline std::vector<std::uint64_t> minhash_signature(std::span<const std::uint64_t> elements,
                                                    const MinHashConfig& cfg) {
    return minhash_signature(elements, cfg.thread_seeds);
}

inline std::vector<std::uint64_t> record_elements(const RecordSet& s) {
    std::vector<std::uint64_t> out;
    out.reserve(s.size());
    for (ItemId it : s.items) out.push_back(it.value);
    return out;
}

inline std::vector<std::uint64_t> minhash_signature(const RecordSet& s, const MinHashConfig& cfg) {
    return minhash_signature(record_elements(s), cfg.thread_seeds);
}

inline LshKey lsh_key(std::span<const std::uint64_t> elements, const MinHashConfig& cfg) {
    return minhash_signature(elements, std::span<const std::uint64_t>(cfg.thread_seeds).first(cfg.p));
}

// Single-band LSH: threads with equal keys share a cluster. Every thread
// lands in exactly one cluster; clusters are ordered by their first member.
inline std::vector<std::vector<std::size_t>> cluster_by_lsh(const std::vector<std::vector<std::uint64_t>>& threads,
                                                            const MinHashConfig& cfg) {
    std::map<LshKey, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < threads.size(); ++i) buckets[lsh_key(threads[i], cfg)].push_back(i);
    std::vector<std::vector<std::size_t>> clusters;
    clusters.reserve(buckets.size());
    for (auto& [key, members] : buckets) clusters.push_back(std::move(members));
    std::sort(clusters.begin(), clusters.end());
    return clusters;
}

// A keyword as a multiset of characters: element (byte, ordinal) for the
// ordinal-th occurrence of that byte, so "aa" and "a" differ.
inline std::vector<std::uint64_t> keyword_elements(std::string_view keyword) {
    std::uint32_t seen[256] = {};
    std::vector<std::uint64_t> out;
    out.reserve(keyword.size());
    for (char ch : keyword) {
        const auto byte = static_cast<unsigned char>(ch);
        out.push_back((static_cast<std::uint64_t>(++seen[byte]) << 8) | byte);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// keyword_p MinHash components over the character multiset, folded into one
// value as key = mix(key, component) starting from key = 0.
inline std::uint64_t keyword_lsh(std::string_view keyword, const MinHashConfig& cfg) {
    if (keyword.empty()) throw std::invalid_argument("keyword must be non-empty");
    const auto elements = keyword_elements(keyword);
    const auto sig = minhash_signature(elements, cfg.keyword_seeds);
    std::uint64_t key = 0;
    for (std::uint64_t c : sig) key = mix(key, c);
    return key;
}

}  // namespace setanon
