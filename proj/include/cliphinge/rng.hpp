#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cliphinge {

/// FNV-1a, used to derive independent RNG streams from (master seed, label).
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// One stream per concern: the label keeps env generation, sampling and net
/// init reproducible independently of each other.
inline std::mt19937_64 seeded_rng(std::uint64_t master_seed, std::string_view label) {
    std::uint64_t h = fnv1a(label);
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(h),
                      static_cast<std::uint32_t>(h >> 32)};
    return std::mt19937_64(seq);
}

/// Index in [0, n) from uniform bits.
inline int uniform_index(std::mt19937_64& rng, int n) {
    return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng));
}

/// Sample an index from a probability vector (must already be normalized).
inline int sample_categorical_n(std::mt19937_64& rng, const double* probs, int n) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double cum = 0.0;
    int last = 0;
    for (int i = 0; i < n; ++i) {
        cum += probs[i];
        last = i;
        if (u <= cum)
            return i;
    }
    return last;
}

template <typename Vec>
int sample_categorical(std::mt19937_64& rng, const Vec& probs) {
    return sample_categorical_n(rng, probs.data(), static_cast<int>(probs.size()));
}

}  // namespace cliphinge
