#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace alignnd {

// Seeded RNG helpers. std::uniform_real_distribution and friends are
// implementation-defined, so all draws go through these to keep results
// reproducible across standard libraries.
using Rng = std::mt19937_64;

// Uniform in [0, 1), 53-bit resolution.
inline double rng_uniform(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double rng_uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * rng_uniform(rng);
}

// Standard normal via Box-Muller.
inline double rng_normal(Rng& rng) {
    double u1 = rng_uniform(rng);
    while (u1 <= 0.0) u1 = rng_uniform(rng);
    const double u2 = rng_uniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Uniform integer in [0, n) by rejection.
inline std::uint64_t rng_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % n;
}

// In-place Fisher-Yates shuffle.
template <typename T>
void rng_shuffle(Rng& rng, std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[rng_index(rng, i)]);
    }
}

// Derive an independent stream from (seed, index), e.g. per epoch or record.
inline Rng rng_substream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return Rng(z ^ (z >> 31));
}

}  // namespace alignnd
