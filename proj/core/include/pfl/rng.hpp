#pragma once

#include <cstdint>
#include <random>

namespace pfl {

// splitmix64 finalizer. Used to derive independent per-stream seeds from a
// base seed and a stream index; the mapping is fixed and part of the
// reproducibility contract (same inputs -> same streams on every platform).
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + stream * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Map a raw 64-bit draw to a double in [0, 1). We avoid
// std::uniform_real_distribution because its output sequence is
// implementation-defined; mt19937_64 itself is specified exactly.
inline double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform draw in [lo, hi]; degenerate ranges return lo exactly.
inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + u01(rng) * (hi - lo);
}

// Fisher-Yates with a fixed index mapping (modulo draw). std::shuffle is
// implementation-defined, this is not.
template <typename Vec>
void deterministic_shuffle(Vec& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace pfl
