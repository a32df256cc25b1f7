#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace sctree {

// std::mt19937_64 is fully specified by the standard, but the <random>
// distributions are not. All sampling here goes through the raw engine so
// results are reproducible across platforms and library versions.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    // Derives an independent stream from a seed and up to three stream ids.
    // A fixed (seed, ids) pair always yields the same stream, regardless of
    // how many draws other streams have consumed.
    static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                      std::uint64_t c = 0) {
        std::uint64_t s = splitmix64(seed);
        s = splitmix64(s ^ (a + 0x1000000001ULL));
        s = splitmix64(s ^ (b + 0x2000000003ULL));
        s = splitmix64(s ^ (c + 0x4000000005ULL));
        return Rng(s);
    }

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::size_t below(std::size_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
        // Rejection sampling keeps the draw unbiased.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return static_cast<std::size_t>(v % n);
    }

    // Index sampled proportionally to the given nonnegative weights.
    std::size_t weighted_index(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0))
            throw std::invalid_argument("Rng::weighted_index: total weight must be positive");
        const double r = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (r < acc) return i;
        }
        return weights.size() - 1;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace sctree
