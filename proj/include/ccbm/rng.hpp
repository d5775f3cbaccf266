#pragma once

#include <cmath>
#include <cstdint>

namespace ccbm {

// Counter-based random numbers: every value is a pure function of
// (seed, stream, draw), so independent streams can be evaluated in any
// order — or concurrently — and still reproduce bit-identical results.

namespace detail {
// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
} // namespace detail

inline std::uint64_t rng_word(std::uint64_t seed, std::uint64_t stream, std::uint64_t draw) {
    std::uint64_t z = detail::mix64(seed);
    z = detail::mix64(z ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
    z = detail::mix64(z ^ (0x8CB92BA72F3D8DD7ULL * (draw + 1)));
    return z;
}

// Uniform in (0, 1); never returns 0 so it is safe under log().
inline double rng_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t draw) {
    return (static_cast<double>(rng_word(seed, stream, draw) >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller; one value per draw index.
inline double rng_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t draw) {
    double u1 = rng_uniform(seed, stream, 2 * draw);
    double u2 = rng_uniform(seed, stream, 2 * draw + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

} // namespace ccbm
