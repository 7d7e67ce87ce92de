#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

namespace helixlab {

/* Counter-based deterministic random numbers built on the splitmix64
 * finalizer.  Every draw is a pure function of (key, counter), so fields
 * generated from a (seed, lambda, j, m, trial) key are bit-identical no
 * matter how lattice loops are ordered or batched. */

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
}

// key for one experiment stream
inline std::uint64_t stream_key(std::uint64_t seed, double lambda, int j, int m, int trial) {
    std::uint64_t k = splitmix64(seed);
    k = mix_key(k, std::bit_cast<std::uint64_t>(lambda));
    k = mix_key(k, static_cast<std::uint64_t>(static_cast<std::int64_t>(j)));
    k = mix_key(k, static_cast<std::uint64_t>(static_cast<std::int64_t>(m)));
    k = mix_key(k, static_cast<std::uint64_t>(static_cast<std::int64_t>(trial)));
    return k;
}

// uniform in (0, 1]; never returns 0 so log() is safe
inline double counter_uniform(std::uint64_t key, std::uint64_t counter) {
    std::uint64_t r = splitmix64(key ^ splitmix64(counter));
    return (static_cast<double>(r >> 11) + 1.0) * 0x1.0p-53;
}

/* standard complex Gaussian (unit variance per component) at a counter;
 * Box-Muller from two decorrelated uniforms */
inline void counter_gaussian_pair(std::uint64_t key, std::uint64_t counter,
                                  double& re, double& im) {
    double u1 = counter_uniform(key, 2 * counter);
    double u2 = counter_uniform(key, 2 * counter + 1);
    double r = std::sqrt(-2.0 * std::log(u1));
    re = r * std::cos(2.0 * M_PI * u2);
    im = r * std::sin(2.0 * M_PI * u2);
}

}  // namespace helixlab
