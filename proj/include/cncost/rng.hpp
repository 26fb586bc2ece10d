#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace cncost {

/// SplitMix64 — the project-wide random generator.
///
/// 64-bit state, one multiply-xorshift mix per draw (Steele, Lea & Flood's
/// published constants). Chosen because its output is bit-identical on every
/// platform, unlike the standard <random> distributions. Streams for
/// independent purposes are derived from a root seed with derive_rng(), which
/// hashes a purpose tag (and optional index) into the state, so datasets,
/// dropout masks and shuffles are reproducible from a single seed.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 mantissa bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    /// Standard normal via Box-Muller (two uniforms per pair, spare cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        // avoid log(0)
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

namespace detail {
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
} // namespace detail

/// Child stream for a named purpose, e.g. derive_rng(seed, "dropout", epoch).
inline SplitMix64 derive_rng(std::uint64_t seed, std::string_view tag) {
    return SplitMix64(detail::mix64(seed ^ detail::fnv1a64(tag)));
}

inline SplitMix64 derive_rng(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
    return SplitMix64(detail::mix64((seed ^ detail::fnv1a64(tag)) + 0x632BE59BD9B4E019ULL * (index + 1)));
}

} // namespace cncost
