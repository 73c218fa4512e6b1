#pragma once

#include <array>
#include <cstdint>
#include <cmath>
#include <numbers>

#include "pathsens/vec3.hpp"

namespace pathsens {

// Counter-based RNG (Philox4x32-10). Every random number is a pure function
// of (seed, step, atom, stream), so serial runs, restarted runs and any
// parallel partitioning of the atom loop produce identical noise.
namespace rng {

// Stream ids keep the per-(step,atom) draws independent.
enum Stream : std::uint32_t {
    stream_kick1 = 0,       // noise of the first BBK half-kick
    stream_kick2 = 1,       // noise of the second BBK half-kick
    stream_init_momentum = 2,
    stream_init_misc = 3,
    stream_gibbs_position = 4,
};

namespace detail {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(m0, ctr[0], hi0, lo0);
        mulhilo(m1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += w0;
        key[1] += w1;
    }
    return ctr;
}

inline std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint64_t step,
                                          std::uint32_t atom, std::uint32_t stream,
                                          std::uint32_t lane) {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
        atom, (stream << 8) | lane};
    const std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return philox4x32(ctr, key);
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    // 53-bit mantissa mapped into (0,1); never returns 0, safe for log().
    const std::uint64_t v = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(v) + 0.5) * 0x1.0p-53;
}

} // namespace detail

// One uniform draw in (0,1).
inline double uniform(std::uint64_t seed, std::uint64_t step, std::uint32_t atom,
                      std::uint32_t stream, std::uint32_t lane = 0) {
    const auto r = detail::block(seed, step, atom, stream, lane);
    return detail::to_unit(r[0], r[1]);
}

// Two standard Gaussians from one counter block (Box-Muller).
inline void gaussian_pair(std::uint64_t seed, std::uint64_t step, std::uint32_t atom,
                          std::uint32_t stream, std::uint32_t lane, double& g0, double& g1) {
    const auto r = detail::block(seed, step, atom, stream, lane);
    const double u1 = detail::to_unit(r[0], r[1]);
    const double u2 = detail::to_unit(r[2], r[3]);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    g0 = rad * std::cos(ang);
    g1 = rad * std::sin(ang);
}

// Three standard Gaussians (one 3-vector of noise).
inline Vec3 gaussian3(std::uint64_t seed, std::uint64_t step, std::uint32_t atom,
                      std::uint32_t stream) {
    Vec3 g;
    double g3;
    gaussian_pair(seed, step, atom, stream, 0, g.x, g.y);
    gaussian_pair(seed, step, atom, stream, 1, g.z, g3);
    (void)g3;
    return g;
}

} // namespace rng
} // namespace pathsens
