#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "regolith/geometry.hpp"

namespace regolith {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// Deterministic random stream. Substreams are derived from (seed, name) so
/// that consumers (one per rover, per sensor, ...) draw independently: adding
/// or removing one consumer never shifts another's sequence.
///
/// All sampling is implemented on top of the mt19937_64 engine with explicit
/// transforms; std::*_distribution is avoided because its output is
/// implementation-defined and would break byte-level run reproducibility.
class SeededStream {
public:
    explicit SeededStream(std::uint64_t seed)
        : origin_(seed), engine_(detail::splitmix64(seed)) {}

    SeededStream(std::uint64_t seed, std::string_view name)
        : SeededStream(seed ^ detail::fnv1a(name)) {}

    /// Derivation uses the seed this stream was created with, not the current
    /// engine position, so substreams are reproducible regardless of draws.
    SeededStream substream(std::string_view name) const { return SeededStream(origin_, name); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // Modulo bias is negligible at 64 bits for the n used here.
        return n == 0 ? 0 : engine_() % n;
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller; the paired sample is cached.
    double standard_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * standard_normal(); }

    Vec2 in_disc(const Vec2& center, double radius) {
        // Rejection sampling; draw count varies but stays deterministic.
        for (;;) {
            const Vec2 p{uniform(-1.0, 1.0), uniform(-1.0, 1.0)};
            if (p.squared_norm() <= 1.0) return center + p * radius;
        }
    }

private:
    std::uint64_t origin_ = 0;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace regolith
