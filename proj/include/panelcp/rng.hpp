#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string_view>

#include "panelcp/errors.hpp"

namespace panelcp {

/// SplitMix64 engine (Vigna's fixed-increment variant of SplittableRandom).
///
/// All randomness in the library flows through this engine. Streams are
/// derived by hashing, never by sharing state, so any unit of work (a panel,
/// a replication, a batch of null draws) can be regenerated in isolation and
/// results never depend on thread scheduling.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~std::uint64_t{0}; }

    constexpr result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

namespace detail {
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
} // namespace detail

/// Fold a list of 64-bit values into a single substream seed.
/// Seeding contract: derive_seed({master, scenario, replication}) names a
/// stream; equal inputs always name the same stream.
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t h = 0x8C8E9DB1F5A3B6CDULL;
    for (std::uint64_t p : parts) {
        h = detail::mix64(h + 0x9E3779B97F4A7C15ULL + detail::mix64(p));
    }
    return h;
}

/// FNV-1a, used to fold scenario identifiers into seed derivations.
constexpr std::uint64_t hash_string(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Convenience sampler over a SplitMix64 stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : engine_(seed) {}

    std::uint64_t next_u64() noexcept { return engine_(); }

    /// Uniform on [0, 1) with 53 random mantissa bits.
    double uniform01() noexcept {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * uniform01();
    }

    /// Unbiased integer in [0, n). Lemire's multiply-shift rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw ParameterError("Rng::below requires n > 0");
        while (true) {
            std::uint64_t x = engine_();
            unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
            auto lo = static_cast<std::uint64_t>(m);
            if (lo >= n || lo >= (0ULL - n) % n) {
                return static_cast<std::uint64_t>(m >> 64);
            }
        }
    }

    /// Standard normal via Marsaglia polar, one spare value cached.
    double gaussian() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    /// Student t with integer dof >= 1: Z / sqrt(W/nu), W a sum of nu
    /// squared normals. Not standardized; callers rescale when they need
    /// unit variance.
    double student_t(int dof) {
        if (dof < 1) throw ParameterError("student_t requires dof >= 1");
        double w = 0.0;
        for (int k = 0; k < dof; ++k) {
            const double g = gaussian();
            w += g * g;
        }
        return gaussian() / std::sqrt(w / static_cast<double>(dof));
    }

private:
    SplitMix64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace panelcp
