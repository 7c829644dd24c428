// SPDX-FileCopyrightText: © 2026 The setanon Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "setanon/core.hpp"
#include "setanon/flip.hpp"
#include "setanon/hash.hpp"

namespace setanon {

// Open facilities are records used as discrete cluster centers.
struct FacilityState {
    std::vector<std::size_t> open;        // sorted record indices
    std::vector<std::size_t> assignment;  // record -> index of its open center record
    double facility_cost = 0.0;

    std::vector<std::size_t> loads(std::size_t n) const {
        std::vector<std::size_t> l(n, 0);
        for (std::size_t c : assignment) ++l[c];
        return l;
    }

    // Assignment classes, one block per open center, in center order.
    Grouping grouping() const {
        Grouping g;
        for (std::size_t c : open) {
            std::vector<std::size_t> block;
            for (std::size_t i = 0; i < assignment.size(); ++i) {
                if (assignment[i] == c) block.push_back(i);
            }
            if (!block.empty()) g.blocks.push_back(std::move(block));
        }
        return g;
    }
};

// Pairwise Hamming distances, cached as a full matrix for small inputs.
class DistanceTable {
public:
    static constexpr std::size_t kCacheLimit = 2048;

    explicit DistanceTable(const Dataset& d) : d_(&d), n_(d.size()) {
        if (n_ <= kCacheLimit) {
            cache_.assign(n_ * n_, 0);
            for (std::size_t i = 0; i < n_; ++i) {
                for (std::size_t j = i + 1; j < n_; ++j) {
                    const auto h = static_cast<std::uint32_t>(hamming(d[i], d[j]));
                    cache_[i * n_ + j] = h;
                    cache_[j * n_ + i] = h;
                }
            }
        }
    }

    std::size_t operator()(std::size_t i, std::size_t j) const {
        if (!cache_.empty()) return cache_[i * n_ + j];
        return hamming((*d_)[i], (*d_)[j]);
    }

    std::size_t size() const noexcept { return n_; }

private:
    const Dataset* d_;
    std::size_t n_;
    std::vector<std::uint32_t> cache_;
};

struct LocalSearchOptions {
    std::uint64_t seed = 0;
    std::size_t initial_facilities = 1;
    std::size_t exhaustive_limit = 256;  // above this, swaps are sampled
};

namespace detail {

class FacilitySearch {
public:
    FacilitySearch(const DistanceTable& dist, double f) : dist_(dist), f_(f), n_(dist.size()) {}

    void open_initial(std::vector<std::size_t> centers) {
        is_open_.assign(n_, 0);
        for (std::size_t c : centers) is_open_[c] = 1;
        reassign();
    }

    // Repeats the best improving open/close/swap move until none improves.
    void improve(SplitMix64& rng, std::size_t exhaustive_limit) {
        const std::size_t max_rounds = 4 * n_ + 100;
        for (std::size_t round = 0; round < max_rounds; ++round) {
            Move best;
            for (std::size_t b = 0; b < n_; ++b) {
                if (!is_open_[b]) consider(best, {Move::Open, n_, b, open_delta(b)});
            }
            if (open_count_ > 1) {
                for (std::size_t a = 0; a < n_; ++a) {
                    if (is_open_[a]) consider(best, {Move::Close, a, n_, close_delta(a)});
                }
            }
            if (n_ <= exhaustive_limit) {
                for (std::size_t a = 0; a < n_; ++a) {
                    if (!is_open_[a]) continue;
                    for (std::size_t b = 0; b < n_; ++b) {
                        if (!is_open_[b]) consider(best, {Move::Swap, a, b, swap_delta(a, b)});
                    }
                }
            } else if (open_count_ < n_) {
                for (std::size_t t = 0; t < n_; ++t) {
                    const std::size_t a = nth_open(uniform_index(rng, open_count_));
                    const std::size_t b = nth_closed(uniform_index(rng, n_ - open_count_));
                    consider(best, {Move::Swap, a, b, swap_delta(a, b)});
                }
            }
            if (best.kind == Move::None) return;
            if (best.kind != Move::Close) is_open_[best.to] = 1;
            if (best.kind != Move::Open) is_open_[best.from] = 0;
            reassign();
        }
    }

    FacilityState state() const {
        FacilityState s;
        for (std::size_t i = 0; i < n_; ++i) {
            if (is_open_[i]) s.open.push_back(i);
        }
        s.assignment = nearest_;
        s.facility_cost = f_;
        return s;
    }

private:
    struct Move {
        enum Kind { None, Open, Close, Swap } kind = None;
        std::size_t from = 0;
        std::size_t to = 0;
        double delta = 0.0;
    };

    static constexpr double kEpsilon = 1e-9;

    static void consider(Move& best, const Move& m) {
        if (m.delta < -kEpsilon && (best.kind == Move::None || m.delta < best.delta - kEpsilon)) best = m;
    }

    void reassign() {
        nearest_.assign(n_, n_);
        d1_.assign(n_, 0);
        d2_.assign(n_, std::numeric_limits<std::size_t>::max());
        open_count_ = 0;
        for (std::size_t c = 0; c < n_; ++c) open_count_ += is_open_[c] ? 1 : 0;
        for (std::size_t i = 0; i < n_; ++i) {
            std::size_t first = std::numeric_limits<std::size_t>::max();
            std::size_t second = first;
            for (std::size_t c = 0; c < n_; ++c) {
                if (!is_open_[c]) continue;
                const std::size_t h = dist_(i, c);
                if (h < first) {
                    second = first;
                    first = h;
                    nearest_[i] = c;
                } else if (h < second) {
                    second = h;
                }
            }
            d1_[i] = first;
            d2_[i] = second;
        }
    }

    double open_delta(std::size_t b) const {
        double delta = f_;
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t h = dist_(i, b);
            if (h < d1_[i]) delta -= static_cast<double>(d1_[i] - h);
        }
        return delta;
    }

    double close_delta(std::size_t a) const {
        double delta = -f_;
        for (std::size_t i = 0; i < n_; ++i) {
            if (nearest_[i] == a) delta += static_cast<double>(d2_[i] - d1_[i]);
        }
        return delta;
    }

    double swap_delta(std::size_t a, std::size_t b) const {
        double delta = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t h = dist_(i, b);
            const std::size_t now = d1_[i];
            const std::size_t after = nearest_[i] == a ? std::min(d2_[i], h) : std::min(now, h);
            delta += static_cast<double>(after) - static_cast<double>(now);
        }
        return delta;
    }

    std::size_t nth_open(std::uint64_t r) const {
        for (std::size_t i = 0; i < n_; ++i) {
            if (is_open_[i] && r-- == 0) return i;
        }
        return 0;
    }

    std::size_t nth_closed(std::uint64_t r) const {
        for (std::size_t i = 0; i < n_; ++i) {
            if (!is_open_[i] && r-- == 0) return i;
        }
        return 0;
    }

    const DistanceTable& dist_;
    double f_;
    std::size_t n_;
    std::size_t open_count_ = 0;
    std::vector<char> is_open_;
    std::vector<std::size_t> nearest_;
    std::vector<std::size_t> d1_;
    std::vector<std::size_t> d2_;
};

// Seeded farthest-point selection of up to `count` distinct centers.
inline std::vector<std::size_t> farthest_points(const DistanceTable& dist, std::size_t count, SplitMix64& rng) {
    const std::size_t n = dist.size();
    std::vector<std::size_t> centers{static_cast<std::size_t>(uniform_index(rng, n))};
    std::vector<std::size_t> gap(n);
    for (std::size_t i = 0; i < n; ++i) gap[i] = dist(i, centers.front());
    while (centers.size() < std::min(count, n)) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (gap[i] > gap[far]) far = i;
        }
        if (gap[far] == 0) break;
        centers.push_back(far);
        for (std::size_t i = 0; i < n; ++i) gap[i] = std::min(gap[i], dist(i, far));
    }
    return centers;
}

inline FacilityState local_search(const DistanceTable& dist, double f, const LocalSearchOptions& opts) {
    SplitMix64 rng(mix(opts.seed, static_cast<std::uint64_t>(SeedStream::LocalSearch)));
    FacilitySearch search(dist, f);
    search.open_initial(farthest_points(dist, std::max<std::size_t>(1, opts.initial_facilities), rng));
    search.improve(rng, opts.exhaustive_limit);
    return search.state();
}

inline FacilityState repair(FacilityState state, const DistanceTable& dist, std::size_t k) {
    const std::size_t n = dist.size();
    if (n < k) throw std::invalid_argument("need at least k records to repair loads");
    for (;;) {
        const auto load = state.loads(n);
        std::size_t victim = n;
        for (std::size_t c : state.open) {
            if (load[c] < k && (victim == n || load[c] < load[victim])) victim = c;
        }
        if (victim == n) break;
        state.open.erase(std::find(state.open.begin(), state.open.end(), victim));
        for (std::size_t i = 0; i < n; ++i) {
            if (state.assignment[i] != victim) continue;
            std::size_t nearest = state.open.front();
            for (std::size_t c : state.open) {
                if (dist(i, c) < dist(i, nearest)) nearest = c;
            }
            state.assignment[i] = nearest;
        }
    }
    return state;
}

}  // namespace detail

// Facility location without load constraints, solved by local search over
// open/close/swap moves on objective sum_i d(i, center(i)) + f * |open|.
inline FacilityState local_search_fl(const Dataset& d, double f, const LocalSearchOptions& opts = {}) {
    if (d.empty()) throw std::invalid_argument("local search needs at least one record");
    if (!(f > 0.0)) throw std::invalid_argument("facility cost must be positive");
    const DistanceTable dist(d);
    return detail::local_search(dist, f, opts);
}

// Closes under-loaded centers (fewest assignees first, ties to the lowest
// index) and moves their records to the nearest remaining center until every
// open center serves at least k records.
inline FacilityState repair_min_load(FacilityState state, const Dataset& d, std::size_t k) {
    if (k == 0) throw std::invalid_argument("k must be at least 1");
    if (d.size() < k) {
        throw std::invalid_argument("need at least k=" + std::to_string(k) + " records, got " +
                                    std::to_string(d.size()));
    }
    const DistanceTable dist(d);
    return detail::repair(std::move(state), dist, k);
}

// Median over records of the distance to the nearest other record.
inline double median_nearest_distance(const DistanceTable& dist) {
    const std::size_t n = dist.size();
    if (n < 2) return 0.0;
    std::vector<std::size_t> nn(n, std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) nn[i] = std::min(nn[i], dist(i, j));
        }
    }
    std::nth_element(nn.begin(), nn.begin() + static_cast<std::ptrdiff_t>(n / 2), nn.end());
    return static_cast<double>(nn[n / 2]);
}

struct KGroupSolution {
    FacilityState state;  // repaired; every open center serves >= k records
    std::size_t flip_cost = 0;
    std::vector<double> tried_costs;  // facility costs evaluated, in order
};

// Doubling search over the facility cost starting at the median
// nearest-neighbour distance. Stops once the repaired edit cost rises or a
// single facility remains; keeps the cheapest repaired solution seen.
inline KGroupSolution kgroup_solve(const Dataset& d, std::size_t k, std::uint64_t seed) {
    if (k == 0) throw std::invalid_argument("k must be at least 1");
    if (d.size() < k) {
        throw std::invalid_argument("need at least k=" + std::to_string(k) + " records, got " +
                                    std::to_string(d.size()));
    }
    const DistanceTable dist(d);
    const std::size_t n = d.size();
    LocalSearchOptions opts;
    opts.seed = seed;
    opts.initial_facilities = (n + k - 1) / k;

    double f = std::max(1.0, median_nearest_distance(dist));
    KGroupSolution best;
    bool have_best = false;
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    for (int step = 0; step < 48; ++step, f *= 2.0) {
        FacilityState raw = detail::local_search(dist, f, opts);
        const bool single = raw.open.size() == 1;
        FacilityState fixed = detail::repair(std::move(raw), dist, k);
        const Grouping g = fixed.grouping();
        std::size_t cost = 0;
        for (const auto& block : g.blocks) cost += majority_cost(d, block);
        best.tried_costs.push_back(f);
        if (!have_best || cost < best.flip_cost) {
            best.state = std::move(fixed);
            best.flip_cost = cost;
            have_best = true;
        }
        if (single || cost > previous) break;
        previous = cost;
    }
    return best;
}

// Load-balanced facility location route to k-anonymity: the repaired
// assignment classes become blocks, each anonymized to its majority center.
inline AnonymizationResult cluster_anonymize(const Dataset& d, std::size_t k, std::uint64_t seed) {
    KGroupSolution sol = kgroup_solve(d, k, seed);
    Grouping g = sol.state.grouping();
    g.canonicalize();
    EditScript script = anonymize_grouping(d, g);
    return make_result(d, std::move(g), std::move(script));
}

}  // namespace setanon
