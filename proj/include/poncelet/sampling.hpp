#pragma once

#include <cstdint>
#include <random>

namespace poncelet {

/// Uniform 53-bit dyadic in [0, 1). Platform independent, unlike std::uniform_real_distribution.
inline double uniform_dyadic(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform 53-bit dyadic in (0, 1).
inline double uniform_open_dyadic(std::mt19937_64& rng) {
    for (;;) {
        const double u = uniform_dyadic(rng);
        if (u > 0.0) {
            return u;
        }
    }
}

} // namespace poncelet
