// SPDX-FileCopyrightText: © 2026 The setanon Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "setanon/core.hpp"

namespace setanon {

// Interns raw item strings to dense ItemIds in order of first appearance.
class ItemDictionary {
public:
    ItemId intern(std::string_view name) {
        auto it = index_.find(std::string(name));
        if (it != index_.end()) return it->second;
        ItemId id{static_cast<std::uint32_t>(names_.size())};
        names_.emplace_back(name);
        index_.emplace(names_.back(), id);
        return id;
    }

    std::optional<ItemId> find(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& name(ItemId id) const { return names_.at(id.value); }
    std::size_t size() const noexcept { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, ItemId> index_;
};

struct SetData {
    Dataset dataset;
    ItemDictionary items;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; };
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t j = i;
        while (j < s.size() && !is_space(s[j])) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::string_view trim_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

}  // namespace detail

// Reads `record_id<TAB>item item ...` lines. Blank lines and lines starting
// with '#' are skipped. Records without items are rejected unless
// allow_empty is set (anonymized outputs may legitimately contain them).
inline SetData read_set_data(std::istream& in, bool allow_empty = false) {
    SetData data;
    std::vector<RecordSet> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = detail::trim_cr(line);
        if (view.empty() || view.front() == '#') continue;
        const auto tab = view.find('\t');
        if (tab == std::string_view::npos) {
            if (!allow_empty) throw Error("line " + std::to_string(lineno) + ": expected record_id<TAB>items");
            records.emplace_back(std::string(view), std::vector<ItemId>{});
            continue;
        }
        std::vector<ItemId> items;
        for (auto tok : detail::split_ws(view.substr(tab + 1))) items.push_back(data.items.intern(tok));
        if (items.empty() && !allow_empty) throw Error("line " + std::to_string(lineno) + ": record has no items");
        records.emplace_back(std::string(view.substr(0, tab)), std::move(items));
    }
    data.dataset = Dataset(std::move(records), data.items.size());
    return data;
}

// Writes one line per record with item names in byte order.
inline void write_set_data(std::ostream& out, const Dataset& d, const ItemDictionary& dict) {
    for (const auto& r : d.records()) {
        std::vector<std::string_view> names;
        names.reserve(r.items.size());
        for (ItemId it : r.items) names.push_back(dict.name(it));
        std::sort(names.begin(), names.end());
        out << r.id << '\t';
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i) out << ' ';
            out << names[i];
        }
        out << '\n';
    }
}

}  // namespace setanon
