// SPDX-FileCopyrightText: © 2026 The setanon Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace setanon {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dense item identifier in [0, universe_size).
struct ItemId {
    std::uint32_t value{};
    friend constexpr auto operator<=>(ItemId, ItemId) = default;
};

// One individual's item set. Items are kept sorted and duplicate-free.
struct RecordSet {
    std::string id;
    std::vector<ItemId> items;

    RecordSet() = default;
    RecordSet(std::string record_id, std::vector<ItemId> record_items)
        : id(std::move(record_id)), items(std::move(record_items)) {
        std::sort(items.begin(), items.end());
        items.erase(std::unique(items.begin(), items.end()), items.end());
    }

    bool contains(ItemId item) const { return std::binary_search(items.begin(), items.end(), item); }
    bool empty() const noexcept { return items.empty(); }
    std::size_t size() const noexcept { return items.size(); }
};

// Set equality on items; record ids never take part.
inline bool same_items(const RecordSet& a, const RecordSet& b) { return a.items == b.items; }

class Dataset {
public:
    Dataset() = default;

    Dataset(std::vector<RecordSet> records, std::size_t universe_size)
        : records_(std::move(records)), universe_size_(universe_size) {
        std::unordered_set<std::string> ids;
        for (const auto& r : records_) {
            if (!std::is_sorted(r.items.begin(), r.items.end()) ||
                std::adjacent_find(r.items.begin(), r.items.end()) != r.items.end()) {
                throw Error("record '" + r.id + "' items are not sorted and unique");
            }
            if (!r.items.empty() && r.items.back().value >= universe_size_) {
                throw Error("record '" + r.id + "' has an item outside the universe");
            }
            if (!ids.insert(r.id).second) throw Error("duplicate record id '" + r.id + "'");
        }
    }

    // Universe size is taken as one past the largest item present.
    static Dataset from_records(std::vector<RecordSet> records) {
        std::size_t m = 0;
        for (const auto& r : records) {
            if (!r.items.empty()) m = std::max<std::size_t>(m, r.items.back().value + 1);
        }
        return Dataset(std::move(records), m);
    }

    const std::vector<RecordSet>& records() const noexcept { return records_; }
    const RecordSet& operator[](std::size_t i) const { return records_[i]; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    std::size_t universe_size() const noexcept { return universe_size_; }

    friend bool operator==(const Dataset& a, const Dataset& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].id != b[i].id || a[i].items != b[i].items) return false;
        }
        return true;
    }

private:
    std::vector<RecordSet> records_;
    std::size_t universe_size_ = 0;
};

// Partition of record indices into anonymity blocks.
struct Grouping {
    std::vector<std::vector<std::size_t>> blocks;

    // Sort members within blocks and blocks by their smallest member.
    void canonicalize() {
        for (auto& b : blocks) std::sort(b.begin(), b.end());
        std::sort(blocks.begin(), blocks.end());
    }

    Grouping canonical() const {
        Grouping g = *this;
        g.canonicalize();
        return g;
    }

    std::size_t min_block_size() const {
        std::size_t m = 0;
        for (const auto& b : blocks) m = (m == 0) ? b.size() : std::min(m, b.size());
        return m;
    }

    // Throws unless blocks partition {0..n-1} with every block of size >= k.
    void validate(std::size_t n, std::size_t k) const {
        std::vector<char> seen(n, 0);
        std::size_t covered = 0;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            if (blocks[b].size() < k) {
                throw Error("block " + std::to_string(b) + " has " + std::to_string(blocks[b].size()) +
                            " records, fewer than k=" + std::to_string(k));
            }
            for (std::size_t i : blocks[b]) {
                if (i >= n) throw Error("block " + std::to_string(b) + " references record out of range");
                if (seen[i]) throw Error("record " + std::to_string(i) + " appears in more than one block");
                seen[i] = 1;
                ++covered;
            }
        }
        if (covered != n) throw Error("grouping does not cover every record");
    }

    friend bool operator==(const Grouping&, const Grouping&) = default;
};

enum class EditOp : std::uint8_t { Add, Delete };

struct Edit {
    std::size_t record{};
    ItemId item{};
    EditOp op{};
    friend bool operator==(const Edit&, const Edit&) = default;
};

inline std::string to_string(const Edit& e) {
    return std::string(e.op == EditOp::Add ? "Add" : "Delete") + "(record " + std::to_string(e.record) +
           ", item " + std::to_string(e.item.value) + ")";
}

struct EditScript {
    std::vector<Edit> edits;

    std::size_t cost() const noexcept { return edits.size(); }
    std::size_t additions() const {
        return static_cast<std::size_t>(
            std::count_if(edits.begin(), edits.end(), [](const Edit& e) { return e.op == EditOp::Add; }));
    }
    std::size_t deletions() const { return cost() - additions(); }

    void append(const EditScript& other) { edits.insert(edits.end(), other.edits.begin(), other.edits.end()); }

    // Same edits with Add and Delete swapped; undoes this script.
    EditScript reversed() const {
        EditScript r;
        r.edits.reserve(edits.size());
        for (const auto& e : edits) {
            r.edits.push_back({e.record, e.item, e.op == EditOp::Add ? EditOp::Delete : EditOp::Add});
        }
        return r;
    }

    friend bool operator==(const EditScript&, const EditScript&) = default;
};

class InvalidEditError : public Error {
public:
    InvalidEditError(std::size_t position, const Edit& edit, const std::string& why)
        : Error("edit #" + std::to_string(position) + " " + to_string(edit) + ": " + why),
          position_(position),
          edit_(edit) {}

    std::size_t position() const noexcept { return position_; }
    const Edit& edit() const noexcept { return edit_; }

private:
    std::size_t position_;
    Edit edit_;
};

// A block's column is not uniform where the solution claims it is.
class InfeasibleError : public Error {
public:
    InfeasibleError(std::size_t block, ItemId column, const std::string& what)
        : Error(what), block_(block), column_(column) {}

    std::size_t block() const noexcept { return block_; }
    ItemId column() const noexcept { return column_; }

private:
    std::size_t block_;
    ItemId column_;
};

// Grouping plus the columns starred out in each block.
struct SuppressionSolution {
    Grouping grouping;
    std::vector<std::vector<ItemId>> suppressed;  // parallel to grouping.blocks, each sorted
};

// Output of every anonymizer. Deleted records are removed from `output`;
// `script` record indices refer to the input dataset.
struct AnonymizationResult {
    Dataset output;
    EditScript script;
    Grouping grouping;
    std::vector<std::size_t> deleted_records;
    std::size_t deleted_items = 0;
    std::vector<std::size_t> empty_records;  // output positions emptied by edits

    std::size_t edit_cost() const noexcept { return script.cost(); }
    std::size_t cost() const noexcept { return script.cost() + deleted_items; }
    bool has_empty_records() const noexcept { return !empty_records.empty(); }
};

// True iff every record's item set is shared by at least k-1 other records.
inline bool is_k_anonymous(const Dataset& d, std::size_t k) {
    if (k == 0) throw std::invalid_argument("k must be at least 1");
    std::map<std::vector<ItemId>, std::size_t> counts;
    for (const auto& r : d.records()) ++counts[r.items];
    return std::all_of(counts.begin(), counts.end(), [k](const auto& kv) { return kv.second >= k; });
}

// Size of the symmetric difference of two sorted item sequences.
inline std::size_t hamming(std::span<const ItemId> a, std::span<const ItemId> b) {
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
    return a.size() + b.size() - 2 * common;
}

inline std::size_t hamming(const RecordSet& a, const RecordSet& b) { return hamming(a.items, b.items); }

inline Dataset apply_edits(const Dataset& d, const EditScript& script) {
    std::vector<std::vector<ItemId>> items;
    items.reserve(d.size());
    for (const auto& r : d.records()) items.push_back(r.items);

    std::set<std::pair<std::size_t, ItemId>> touched;
    for (std::size_t pos = 0; pos < script.edits.size(); ++pos) {
        const Edit& e = script.edits[pos];
        if (e.record >= d.size()) throw InvalidEditError(pos, e, "record out of range");
        if (!touched.emplace(e.record, e.item).second) {
            throw InvalidEditError(pos, e, "record/item pair already edited");
        }
        auto& v = items[e.record];
        auto it = std::lower_bound(v.begin(), v.end(), e.item);
        const bool present = it != v.end() && *it == e.item;
        if (e.op == EditOp::Add) {
            if (present) throw InvalidEditError(pos, e, "item already present");
            v.insert(it, e.item);
        } else {
            if (!present) throw InvalidEditError(pos, e, "item not present");
            v.erase(it);
        }
    }

    std::vector<RecordSet> out;
    out.reserve(d.size());
    std::size_t m = d.universe_size();
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!items[i].empty()) m = std::max<std::size_t>(m, items[i].back().value + 1);
        out.emplace_back(d[i].id, std::move(items[i]));
    }
    return Dataset(std::move(out), m);
}

struct ColumnCount {
    ItemId item;
    std::size_t ones;
};

// Occurrence count of every item present in at least one record of the block.
inline std::vector<ColumnCount> column_counts(const Dataset& d, std::span<const std::size_t> block) {
    std::vector<ItemId> all;
    for (std::size_t i : block) all.insert(all.end(), d[i].items.begin(), d[i].items.end());
    std::sort(all.begin(), all.end());
    std::vector<ColumnCount> counts;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j] == all[i]) ++j;
        counts.push_back({all[i], j - i});
        i = j;
    }
    return counts;
}

// Columns on which the block's records do not all agree.
inline std::vector<ItemId> disagreeing_columns(const Dataset& d, std::span<const std::size_t> block) {
    std::vector<ItemId> cols;
    for (const auto& c : column_counts(d, block)) {
        if (c.ones < block.size()) cols.push_back(c.item);
    }
    return cols;
}

// Number of starred cells: sum over blocks of |block| x |suppressed columns|.
// Throws InfeasibleError if an unsuppressed column is not uniform in its block.
inline std::size_t suppression_cost(const Dataset& d, const SuppressionSolution& s) {
    if (s.suppressed.size() != s.grouping.blocks.size()) {
        throw Error("suppression solution has " + std::to_string(s.suppressed.size()) + " column lists for " +
                    std::to_string(s.grouping.blocks.size()) + " blocks");
    }
    std::size_t cost = 0;
    for (std::size_t b = 0; b < s.grouping.blocks.size(); ++b) {
        const auto& block = s.grouping.blocks[b];
        const auto& starred = s.suppressed[b];
        for (const auto& c : column_counts(d, block)) {
            if (c.ones < block.size() && !std::binary_search(starred.begin(), starred.end(), c.item)) {
                throw InfeasibleError(b, c.item,
                                      "block " + std::to_string(b) + " column " + std::to_string(c.item.value) +
                                          " is not uniform but is not suppressed");
            }
        }
        cost += block.size() * starred.size();
    }
    return cost;
}

// Sum over columns of min(N1, N0): the flip cost of a block under its majority center.
inline std::size_t majority_cost(const Dataset& d, std::span<const std::size_t> block) {
    std::size_t cost = 0;
    for (const auto& c : column_counts(d, block)) cost += std::min(c.ones, block.size() - c.ones);
    return cost;
}

// Star cost of a block taken on its own: |block| x number of disagreeing columns.
inline std::size_t star_cost(const Dataset& d, std::span<const std::size_t> block) {
    return block.size() * disagreeing_columns(d, block).size();
}

// Assemble a result from a grouping and the script that realises it.
inline AnonymizationResult make_result(const Dataset& input, Grouping grouping, EditScript script) {
    AnonymizationResult r;
    r.output = apply_edits(input, script);
    for (std::size_t i = 0; i < r.output.size(); ++i) {
        if (r.output[i].empty()) r.empty_records.push_back(i);
    }
    r.script = std::move(script);
    r.grouping = std::move(grouping);
    return r;
}

}  // namespace setanon
