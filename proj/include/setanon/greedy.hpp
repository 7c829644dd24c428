// SPDX-FileCopyrightText: © 2026 The setanon Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "setanon/core.hpp"
#include "setanon/flip.hpp"

namespace setanon {

// A block the greedy may pick. star_cost is the suppression cost of the
// members taken as a standalone block.
struct CandidateGroup {
    std::vector<std::size_t> members;  // sorted
    std::size_t star_cost = 0;

    friend bool operator==(const CandidateGroup&, const CandidateGroup&) = default;
};

namespace detail {

inline void require_enough_records(const Dataset& d, std::size_t k) {
    if (k == 0) throw std::invalid_argument("k must be at least 1");
    if (d.size() < k) {
        throw std::invalid_argument("need at least k=" + std::to_string(k) + " records, got " +
                                    std::to_string(d.size()));
    }
}

}  // namespace detail

// For each record and each size s in [k, 2k-1], the record plus its s-1
// nearest neighbours by Hamming distance (ties by index). Duplicates are
// dropped; the result is sorted by member list.
inline std::vector<CandidateGroup> generate_candidates(const Dataset& d, std::size_t k) {
    detail::require_enough_records(d, k);
    const std::size_t n = d.size();
    const std::size_t largest = std::min(n, 2 * k - 1);

    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::pair<std::size_t, std::size_t>> by_distance;  // (distance, index)
    for (std::size_t seed = 0; seed < n; ++seed) {
        by_distance.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != seed) by_distance.emplace_back(hamming(d[seed], d[j]), j);
        }
        const std::size_t need = largest - 1;
        std::partial_sort(by_distance.begin(), by_distance.begin() + static_cast<std::ptrdiff_t>(need),
                          by_distance.end());
        for (std::size_t s = k; s <= largest; ++s) {
            std::vector<std::size_t> g{seed};
            for (std::size_t t = 0; t + 1 < s; ++t) g.push_back(by_distance[t].second);
            std::sort(g.begin(), g.end());
            groups.push_back(std::move(g));
        }
    }
    std::sort(groups.begin(), groups.end());
    groups.erase(std::unique(groups.begin(), groups.end()), groups.end());

    std::vector<CandidateGroup> out;
    out.reserve(groups.size());
    for (auto& g : groups) {
        const std::size_t cost = star_cost(d, g);
        out.push_back({std::move(g), cost});
    }
    return out;
}

// Set-cover style greedy for suppression-based k-anonymity. Each round takes
// the candidate with the lowest star cost per newly covered record, counting
// only its still-uncovered members and only while at least k of them remain.
// Leftover records (fewer than k, or none coverable) are merged into the
// block whose star cost grows least, or form a block of their own.
inline SuppressionSolution greedy_anonymize(const Dataset& d, std::size_t k) {
    detail::require_enough_records(d, k);
    const std::size_t n = d.size();
    const auto candidates = generate_candidates(d, k);

    std::vector<char> covered(n, 0);
    std::size_t uncovered = n;
    Grouping grouping;

    std::vector<std::size_t> live;
    while (uncovered > 0) {
        bool found = false;
        std::vector<std::size_t> best_members;
        std::size_t best_cost = 0;
        for (const auto& c : candidates) {
            live.clear();
            for (std::size_t i : c.members) {
                if (!covered[i]) live.push_back(i);
            }
            if (live.size() < k) continue;
            const std::size_t cost = live.size() == c.members.size() ? c.star_cost : star_cost(d, live);
            // cost / |live| < best_cost / |best|, then lower cost, then lower members
            bool better = !found;
            if (found) {
                const auto lhs = cost * best_members.size();
                const auto rhs = best_cost * live.size();
                better = lhs < rhs || (lhs == rhs && (cost < best_cost || (cost == best_cost && live < best_members)));
            }
            if (better) {
                found = true;
                best_members = live;
                best_cost = cost;
            }
        }
        if (!found) break;
        for (std::size_t i : best_members) covered[i] = 1;
        uncovered -= best_members.size();
        grouping.blocks.push_back(std::move(best_members));
    }

    if (uncovered > 0) {
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < n; ++i) {
            if (!covered[i]) rest.push_back(i);
        }
        if (rest.size() >= k || grouping.blocks.empty()) {
            grouping.blocks.push_back(std::move(rest));
        } else {
            std::size_t target = 0;
            std::size_t best_increase = std::numeric_limits<std::size_t>::max();
            for (std::size_t b = 0; b < grouping.blocks.size(); ++b) {
                std::vector<std::size_t> merged = grouping.blocks[b];
                merged.insert(merged.end(), rest.begin(), rest.end());
                const std::size_t increase = star_cost(d, merged) - star_cost(d, grouping.blocks[b]);
                if (increase < best_increase) {
                    best_increase = increase;
                    target = b;
                }
            }
            auto& block = grouping.blocks[target];
            block.insert(block.end(), rest.begin(), rest.end());
            std::sort(block.begin(), block.end());
        }
    }

    grouping.canonicalize();
    SuppressionSolution s;
    for (const auto& block : grouping.blocks) s.suppressed.push_back(disagreeing_columns(d, block));
    s.grouping = std::move(grouping);
    return s;
}

// Greedy suppression followed by the majority flip conversion.
inline AnonymizationResult greedy_flip_anonymize(const Dataset& d, std::size_t k) {
    SuppressionSolution s = greedy_anonymize(d, k);
    EditScript script = suppression_to_flip(d, s);
    return make_result(d, std::move(s.grouping), std::move(script));
}

}  // namespace setanon
