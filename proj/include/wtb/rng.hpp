#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace wtb {

using Rng = std::mt19937_64;

// FNV-1a, used to fold string labels into seeds.
inline std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Seeds a generator from (master seed, label, index). std::seed_seq's mixing
// is fixed by the standard, so streams are portable across library vendors.
inline Rng make_rng(std::uint64_t master_seed, std::string_view label, std::uint64_t index) {
    const std::uint64_t tag = fnv1a(label);
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(tag),
                      static_cast<std::uint32_t>(tag >> 32),
                      static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace wtb
