// SPDX-FileCopyrightText: © 2026 The setanon Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "setanon/core.hpp"

namespace setanon {

struct GroupAnonymization {
    RecordSet center;
    EditScript script;  // record indices are positions in the input block
};

namespace detail {

// Majority center and edits for `count` records. The script uses
// `label(pos)` as the record index of the pos-th member. Edits come out
// ordered by record position, then item.
template <typename ItemsOf, typename Label>
GroupAnonymization majority_edits(std::size_t count, ItemsOf items_of, Label label) {
    GroupAnonymization g;
    std::vector<ItemId> all;
    for (std::size_t pos = 0; pos < count; ++pos) {
        const auto& items = items_of(pos);
        all.insert(all.end(), items.begin(), items.end());
    }
    std::sort(all.begin(), all.end());
    std::vector<ItemId> center;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j] == all[i]) ++j;
        // Strictly more ones than zeros keeps the column; ties delete.
        if (j - i > count - (j - i)) center.push_back(all[i]);
        i = j;
    }
    for (std::size_t pos = 0; pos < count; ++pos) {
        const auto& items = items_of(pos);
        std::size_t i = 0, j = 0;
        while (i < items.size() || j < center.size()) {
            if (j == center.size() || (i < items.size() && items[i] < center[j])) {
                g.script.edits.push_back({label(pos), items[i], EditOp::Delete});
                ++i;
            } else if (i == items.size() || center[j] < items[i]) {
                g.script.edits.push_back({label(pos), center[j], EditOp::Add});
                ++j;
            } else {
                ++i;
                ++j;
            }
        }
    }
    g.center = RecordSet("", std::move(center));
    return g;
}

}  // namespace detail

// Makes every record of the block equal to its per-column majority set.
// Cost equals the sum over columns of min(N1, N0).
inline GroupAnonymization anonymize_group(std::span<const RecordSet> records) {
    if (records.empty()) throw std::invalid_argument("anonymize_group needs at least one record");
    return detail::majority_edits(
        records.size(), [records](std::size_t pos) -> const std::vector<ItemId>& { return records[pos].items; },
        [](std::size_t pos) { return pos; });
}

// Same as anonymize_group over d's records at `block`; edits carry dataset indices.
inline GroupAnonymization anonymize_block(const Dataset& d, std::span<const std::size_t> block) {
    if (block.empty()) throw std::invalid_argument("anonymize_block needs at least one record");
    return detail::majority_edits(
        block.size(), [&d, block](std::size_t pos) -> const std::vector<ItemId>& { return d[block[pos]].items; },
        [block](std::size_t pos) { return block[pos]; });
}

// Flip script realising the majority center of every block of a grouping.
inline EditScript anonymize_grouping(const Dataset& d, const Grouping& g) {
    EditScript script;
    for (const auto& block : g.blocks) script.append(anonymize_block(d, block).script);
    return script;
}

// Converts a feasible suppression solution into a flip script: every starred
// column of a block is set to all-ones or all-zeros, whichever needs fewer flips.
inline EditScript suppression_to_flip(const Dataset& d, const SuppressionSolution& s) {
    (void)suppression_cost(d, s);  // throws if infeasible
    return anonymize_grouping(d, s.grouping);
}

class NonUniformBlockError : public Error {
public:
    NonUniformBlockError(std::size_t block, const std::string& what) : Error(what), block_(block) {}
    std::size_t block() const noexcept { return block_; }

private:
    std::size_t block_;
};

// Reverse direction: star out, per block, every column on which the block's
// original records disagree. The script must make each block uniform.
inline SuppressionSolution flip_to_suppression(const Dataset& d, const Grouping& grouping, const EditScript& script) {
    const Dataset edited = apply_edits(d, script);
    SuppressionSolution s;
    s.grouping = grouping;
    for (std::size_t b = 0; b < grouping.blocks.size(); ++b) {
        const auto& block = grouping.blocks[b];
        for (std::size_t i : block) {
            if (i >= d.size()) throw Error("block " + std::to_string(b) + " references record out of range");
        }
        for (std::size_t pos = 1; pos < block.size(); ++pos) {
            if (!same_items(edited[block[pos]], edited[block.front()])) {
                throw NonUniformBlockError(b, "script does not make block " + std::to_string(b) + " uniform");
            }
        }
        s.suppressed.push_back(disagreeing_columns(d, block));
    }
    return s;
}

}  // namespace setanon
