// SPDX-FileCopyrightText: © 2026 The setanon Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace setanon {

// Platform-independent 64-bit mixing. Every seeded quantity in the library
// (MinHash components, keyword keys, thread ids, local-search starts) is
// derived from these two functions, so outputs are bit-identical everywhere.
//
//   splitmix64(x):
//     z = x + 0x9E3779B97F4A7C15
//     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//     return z ^ (z >> 31)
//
//   mix(seed, x) = splitmix64(seed ^ splitmix64(x))
inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    std::uint64_t z = x + kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t x) noexcept {
    return splitmix64(seed ^ splitmix64(x));
}

// FNV-1a over bytes; used to turn strings into stable 64-bit values.
constexpr std::uint64_t fnv1a(const char* data, std::size_t size) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Sequential SplitMix64 generator. Satisfies UniformRandomBitGenerator, but
// callers should draw bounded values through uniform_index() rather than
// <random> distributions, whose output differs between standard libraries.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

    constexpr result_type operator()() noexcept {
        const std::uint64_t x = state_;
        state_ += kGolden;
        return splitmix64(x);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

private:
    std::uint64_t state_;
};

// Uniform value in [0, bound) by rejection; bound must be > 0.
template <typename Rng>
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % bound;
}

// Independent sub-streams of one master seed, tagged by purpose.
enum class SeedStream : std::uint64_t {
    ThreadMinHash = 0x7468726561642d6dULL,  // "thread-m"
    KeywordMinHash = 0x6b6579776f72642dULL, // "keyword-"
    ThreadIds = 0x7468726561642d69ULL,      // "thread-i"
    LocalSearch = 0x6c6f63616c2d7365ULL,    // "local-se"
};

inline std::vector<std::uint64_t> derive_seeds(std::uint64_t master, SeedStream stream, std::size_t count) {
    SplitMix64 gen(mix(master, static_cast<std::uint64_t>(stream)));
    std::vector<std::uint64_t> seeds(count);
    for (auto& s : seeds) s = gen();
    return seeds;
}

}  // namespace setanon
