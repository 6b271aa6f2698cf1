/// @file rng.hpp
/// @brief Counter-based random number generation (Philox4x32-10).
///
/// Every random draw in the library is a pure function of
/// (seed, purpose, stream, step, index), so noise paths and random fields are
/// bitwise reproducible under any parallel schedule.  Header-only.

#ifndef NSDA_RNG_HPP
#define NSDA_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace nsda::rng {

struct Counter {
    std::uint32_t v0, v1, v2, v3;
};

/// One Philox4x32-10 block.  Key is the 64-bit seed split into two words.
inline Counter philox4x32(Counter ctr, std::uint64_t key64) {
    constexpr std::uint32_t M0 = 0xD2511F53u;
    constexpr std::uint32_t M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u;
    constexpr std::uint32_t W1 = 0xBB67AE85u;

    std::uint32_t k0 = static_cast<std::uint32_t>(key64);
    std::uint32_t k1 = static_cast<std::uint32_t>(key64 >> 32);

    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr.v0;
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr.v2;
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        ctr = Counter{hi1 ^ ctr.v1 ^ k0, lo1, hi0 ^ ctr.v3 ^ k1, lo0};
        k0 += W0;
        k1 += W1;
    }
    return ctr;
}

/// Purpose tags keep independent uses of the same seed on disjoint streams.
enum class Purpose : std::uint32_t {
    forcing = 1,
    perturbation = 2,
    observation_noise = 3,
    calibration = 4,
    random_field = 5,
    test = 16,
};

/// Coordinates of one counter-based draw.
struct Draw {
    std::uint64_t seed = 0;
    Purpose purpose = Purpose::test;
    std::uint32_t stream = 0;  // ensemble member, trial index, ...
    std::uint32_t step = 0;    // time step or secondary index
    std::uint32_t index = 0;   // element within the step (channel pair, mode, ...)
};

/// Two independent uniforms in (0,1], from one Philox block.
inline std::array<double, 2> uniform_pair(const Draw& d) {
    Counter c{d.index, d.step, d.stream,
              (static_cast<std::uint32_t>(d.purpose) << 8)};
    const Counter r = philox4x32(c, d.seed);
    const std::uint64_t a = (static_cast<std::uint64_t>(r.v0) << 32) | r.v1;
    const std::uint64_t b = (static_cast<std::uint64_t>(r.v2) << 32) | r.v3;
    constexpr double scale = 1.0 / 18446744073709551616.0; // 2^-64
    // +1 keeps the value strictly positive for the Box-Muller log.
    return {static_cast<double>(a + 1) * scale, static_cast<double>(b + 1) * scale};
}

/// Standard normal pair via Box-Muller.
inline std::array<double, 2> gaussian_pair(const Draw& d) {
    const auto [u1, u2] = uniform_pair(d);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

/// Single uniform in (0,1].
inline double uniform(const Draw& d) { return uniform_pair(d)[0]; }

} // namespace nsda::rng

#endif
