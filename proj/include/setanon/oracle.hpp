// SPDX-FileCopyrightText: © 2026 The setanon Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "setanon/core.hpp"

namespace setanon {

// Largest instance the exhaustive solvers accept.
inline constexpr std::size_t kOracleMaxRecords = 10;

struct FlipOptimum {
    std::size_t cost = 0;
    Grouping grouping;  // canonical; lexicographically smallest among optima
};

struct SuppressionOptimum {
    std::size_t cost = 0;
    SuppressionSolution solution;
};

namespace detail {

struct PartitionSearch {
    using BlockCost = std::function<std::size_t(const std::vector<std::size_t>&)>;

    PartitionSearch(std::size_t records, std::size_t smallest, std::size_t largest, BlockCost cost)
        : n(records), min_block(smallest), max_block(largest), block_cost(std::move(cost)) {}

    std::size_t n;
    std::size_t min_block;
    std::size_t max_block;
    BlockCost block_cost;

    static constexpr std::size_t kUnknown = std::numeric_limits<std::size_t>::max();
    static constexpr std::size_t kInfeasible = kUnknown - 1;

    std::vector<std::size_t> block_memo;
    std::vector<std::size_t> best;
    std::vector<std::uint32_t> choice;

    static std::vector<std::size_t> members(std::uint32_t mask) {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; mask; ++i, mask >>= 1) {
            if (mask & 1u) out.push_back(i);
        }
        return out;
    }

    std::size_t cost_of_block(std::uint32_t mask) {
        if (block_memo[mask] == kUnknown) block_memo[mask] = block_cost(members(mask));
        return block_memo[mask];
    }

    // Minimum cost of partitioning `mask`; the block holding the lowest
    // member is chosen first, which is also the first block in canonical order.
    std::size_t solve(std::uint32_t mask) {
        if (mask == 0) return 0;
        if (best[mask] != kUnknown) return best[mask];
        const std::uint32_t low = mask & (~mask + 1);
        const std::uint32_t rest = mask ^ low;
        std::size_t best_cost = kInfeasible;
        std::uint32_t best_block = 0;
        // Enumerate every subset of `rest` to join the lowest member.
        for (std::uint32_t sub = rest;; sub = (sub - 1) & rest) {
            const std::uint32_t block = sub | low;
            const auto size = static_cast<std::size_t>(std::popcount(block));
            if (size >= min_block && size <= max_block) {
                const std::size_t here = cost_of_block(block);
                const std::size_t tail = here == kInfeasible ? kInfeasible : solve(mask ^ block);
                if (tail != kInfeasible) {
                    const std::size_t total = here + tail;
                    if (total < best_cost ||
                        (total == best_cost && members(block) < members(best_block))) {
                        best_cost = total;
                        best_block = block;
                    }
                }
            }
            if (sub == 0) break;
        }
        best[mask] = best_cost;
        choice[mask] = best_block;
        return best_cost;
    }

    std::pair<std::size_t, Grouping> run() {
        const std::uint32_t full = (1u << n) - 1u;
        block_memo.assign(std::size_t{1} << n, kUnknown);
        best.assign(std::size_t{1} << n, kUnknown);
        choice.assign(std::size_t{1} << n, 0);
        const std::size_t cost = solve(full);
        if (cost == kInfeasible) throw Error("no partition satisfies the block-size limits");
        Grouping g;
        for (std::uint32_t mask = full; mask;) {
            g.blocks.push_back(members(choice[mask]));
            mask ^= choice[mask];
        }
        g.canonicalize();
        return {cost, g};
    }
};

inline void check_oracle_input(const Dataset& d, std::size_t k) {
    if (k == 0) throw std::invalid_argument("k must be at least 1");
    if (d.size() > kOracleMaxRecords) {
        throw std::invalid_argument("exhaustive search is limited to " + std::to_string(kOracleMaxRecords) +
                                    " records, got " + std::to_string(d.size()));
    }
    if (d.size() < k) {
        throw std::invalid_argument("need at least k=" + std::to_string(k) + " records, got " +
                                    std::to_string(d.size()));
    }
}

}  // namespace detail

// Minimum flip cost over all groupings. Blocks larger than 2k-1 are never
// needed because splitting them cannot raise the per-column min(N1, N0);
// pass restrict_block_size = false to search every partition anyway.
inline FlipOptimum optimal_flip(const Dataset& d, std::size_t k, bool restrict_block_size = true) {
    detail::check_oracle_input(d, k);
    if (d.empty()) return {};
    detail::PartitionSearch search(d.size(), k, restrict_block_size ? 2 * k - 1 : d.size(),
                                   [&d](const std::vector<std::size_t>& b) { return majority_cost(d, b); });
    auto [cost, grouping] = search.run();
    return {cost, std::move(grouping)};
}

// Minimum flip cost over partitions into blocks of size >= k that also
// satisfy `admissible` (for instance, k distinct owners per block). Block
// sizes are not capped since splitting a block may break the predicate.
inline FlipOptimum optimal_flip_if(const Dataset& d, std::size_t k,
                                   const std::function<bool(const std::vector<std::size_t>&)>& admissible) {
    detail::check_oracle_input(d, k);
    if (d.empty()) return {};
    detail::PartitionSearch search(d.size(), k, d.size(), [&](const std::vector<std::size_t>& b) {
        return admissible(b) ? majority_cost(d, b) : detail::PartitionSearch::kInfeasible;
    });
    auto [cost, grouping] = search.run();
    return {cost, std::move(grouping)};
}

// Minimum number of starred cells over all partitions into blocks of size >= k.
inline SuppressionOptimum optimal_suppression(const Dataset& d, std::size_t k) {
    detail::check_oracle_input(d, k);
    if (d.empty()) return {};
    detail::PartitionSearch search(d.size(), k, d.size(),
                                   [&d](const std::vector<std::size_t>& b) { return star_cost(d, b); });
    auto [cost, grouping] = search.run();
    SuppressionOptimum out;
    out.cost = cost;
    for (const auto& block : grouping.blocks) out.solution.suppressed.push_back(disagreeing_columns(d, block));
    out.solution.grouping = std::move(grouping);
    return out;
}

}  // namespace setanon
