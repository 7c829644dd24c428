// SPDX-FileCopyrightText: © 2026 The setanon Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "setanon/core.hpp"

namespace setanon {

struct QueryEvent {
    std::string user_id;
    std::int64_t timestamp = 0;  // seconds since the Unix epoch, UTC
    std::string time_text;       // as read, re-emitted verbatim
    std::string raw_query;
};

// All of one user's queries in time order.
struct Session {
    std::string user_id;
    std::vector<QueryEvent> queries;
};

struct QueryLog {
    std::vector<Session> sessions;  // ordered by user id
    std::size_t rows_read = 0;
    std::size_t rows_skipped = 0;

    std::size_t query_count() const {
        std::size_t c = 0;
        for (const auto& s : sessions) c += s.queries.size();
        return c;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return fields;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

// Parses `YYYY-MM-DD HH:MM:SS` as UTC seconds since the epoch.
inline std::optional<std::int64_t> parse_timestamp(std::string_view text) {
    text = detail::trim(text);
    if (text.size() != 19 || text[4] != '-' || text[7] != '-' || text[10] != ' ' || text[13] != ':' ||
        text[16] != ':') {
        return std::nullopt;
    }
    int y = 0;
    unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (!detail::parse_int(text.substr(0, 4), y) || !detail::parse_int(text.substr(5, 2), mo) ||
        !detail::parse_int(text.substr(8, 2), d) || !detail::parse_int(text.substr(11, 2), h) ||
        !detail::parse_int(text.substr(14, 2), mi) || !detail::parse_int(text.substr(17, 2), s)) {
        return std::nullopt;
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y} / month{mo} / day{d}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
    const auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
    return duration_cast<seconds>(tp.time_since_epoch()).count();
}

// Reads an AOL-style log: AnonID<TAB>Query<TAB>QueryTime[<TAB>ItemRank<TAB>ClickURL].
// Extra columns are ignored and a leading header row is skipped. Rows with
// too few fields, an empty query or a bad timestamp are counted and skipped.
// Sessions are sorted by user id; each session is stably sorted by time.
inline QueryLog read_query_log(std::istream& in) {
    QueryLog log;
    std::map<std::string, std::vector<QueryEvent>> by_user;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (detail::trim(view).empty()) continue;
        const auto fields = detail::split_tabs(view);
        if (first) {
            first = false;
            if (!fields.empty() && detail::trim(fields[0]) == "AnonID") continue;
        }
        ++log.rows_read;
        if (fields.size() < 3) {
            ++log.rows_skipped;
            continue;
        }
        const auto user = detail::trim(fields[0]);
        const auto query = detail::trim(fields[1]);
        const auto when = parse_timestamp(fields[2]);
        if (user.empty() || query.empty() || !when) {
            ++log.rows_skipped;
            continue;
        }
        by_user[std::string(user)].push_back(
            {std::string(user), *when, std::string(detail::trim(fields[2])), std::string(query)});
    }
    for (auto& [user, events] : by_user) {
        std::stable_sort(events.begin(), events.end(),
                         [](const QueryEvent& a, const QueryEvent& b) { return a.timestamp < b.timestamp; });
        log.sessions.push_back({user, std::move(events)});
    }
    return log;
}

}  // namespace setanon
