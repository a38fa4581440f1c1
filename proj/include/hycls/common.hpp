#pragma once

#include <cstdint>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hycls {

// Thrown when a table/config lookup fails; message names the missing key.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an assignment cannot place every broadcaster.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Deterministic hashing / RNG. The standard distributions are not portable
// across library implementations, so sampling is hand-rolled on top of a
// fixed-algorithm generator. Same seed => same stream everywhere.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// xoshiro256** — small, fast, reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t x = seed;
        for (auto& w : s_) {
            x = splitmix64(x);
            w = x;
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(next_double() * static_cast<double>(n));
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Box-Muller, one value per call.
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        return mean + stddev * z;
    }

    double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

    // Knuth's method; fine for the small rates this project draws.
    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        if (lambda > 64.0) {
            // split to keep exp(-lambda) away from underflow
            const int half = poisson(lambda * 0.5);
            return half + poisson(lambda - lambda * 0.5);
        }
        const double limit = std::exp(-lambda);
        double p = 1.0;
        int k = 0;
        do {
            p *= next_double();
            ++k;
        } while (p > limit);
        return k - 1;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

// Stable hash-derived uniform in [0,1) for (seed, a, b) triples. Used for
// per-pair latency jitter so the value never depends on evaluation order.
inline double hash_unit(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    const std::uint64_t h = splitmix64(mix_seed(mix_seed(seed, a), b));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace hycls
