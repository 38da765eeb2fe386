#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace advkit {

// Deterministic random source. The engine (mt19937_64) is fully specified by
// the standard; the distributions are implemented here because the standard
// library leaves them implementation-defined, which would break cross-compiler
// reproducibility of seeds.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n).
    std::int64_t uniform_int(std::int64_t n) {
        const auto un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return static_cast<std::int64_t>(v % un);
    }

    // Standard normal via Box-Muller without pair caching (stateless stream).
    double normal() {
        double u1 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Independent child stream; consumes one draw from the parent.
    Rng fork() { return Rng(next_u64() ^ 0x9e3779b97f4a7c15ull); }

private:
    std::mt19937_64 eng_;
};

}  // namespace advkit
