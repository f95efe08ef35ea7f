#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace kinlab::rng {

/// Philox4x32-10 (Salmon et al., Random123). Stateless: output is a pure
/// function of (counter, key).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u;
    constexpr std::uint32_t M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u;
    constexpr std::uint32_t W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed of ensemble member k.
inline std::uint64_t sample_seed(std::uint64_t master_seed, std::uint64_t k) {
    return splitmix64(master_seed ^ splitmix64(k + 0x632BE59BD9B4E019ull));
}

inline double to_unit_open(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(a >> 5) << 26) | (b >> 6);
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

/// Standard normal variate keyed by (seed, level, index), Box-Muller on one Philox block.
inline double gaussian(std::uint64_t seed, std::uint32_t level, std::uint64_t index) {
    const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                                           level, 0x6b696e6cu};
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const auto r = philox4x32(ctr, key);
    const double u1 = to_unit_open(r[0], r[1]);
    const double u2 = to_unit_open(r[2], r[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace kinlab::rng
