#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace handsel {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Derive an independent stream seed, e.g. one per tree or per team.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 1));
}

// mt19937_64 with hand-rolled variate transforms. std::*_distribution output
// is implementation-defined, which would break byte-identical artifacts
// across standard libraries; these transforms pin the draw sequence.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform in [0, 1), 53-bit resolution
    double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    // uniform integer in [0, n), rejection sampled (no modulo bias)
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t rem = (0 - n) % n; // 2^64 mod n
        std::uint64_t v = eng_();
        if (rem != 0) {
            while (v >= 0 - rem) v = eng_();
        }
        return v % n;
    }

    // Box-Muller without a cached spare, so state is just the engine
    double normal(double mean = 0.0, double sd = 1.0) {
        const double u1 = u01();
        const double u2 = u01();
        const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
        return mean + sd * r * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::mt19937_64 eng_;
};

} // namespace handsel
