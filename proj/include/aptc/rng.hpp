#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace aptc {

// Deterministic RNG used everywhere randomness is needed.
//
// std::mt19937_64 output is fully specified by the standard, but the
// std:: distributions are not (their algorithms are implementation
// defined), so this wrapper pins down the exact mapping from raw engine
// output to bounded ints / reals. Two builds on different compilers
// produce identical draw sequences for identical seeds, which is what
// the reproducibility contracts rely on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform integer in [0, n). Plain modulo; the bias is irrelevant at
    // the ranges used here and the mapping is portable.
    std::size_t bounded(std::size_t n) {
        return static_cast<std::size_t>(next_u64() % static_cast<std::uint64_t>(n));
    }

    // Uniform double in [0, 1).
    double real() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [lo, hi).
    double range(double lo, double hi) { return lo + (hi - lo) * real(); }

    // Standard normal via Box-Muller on the portable real() stream.
    double normal() {
        double u1 = 1.0 - real();  // (0, 1]
        double u2 = real();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Fisher-Yates over [0, n), returned as an index permutation.
    template <typename Index = std::size_t>
    std::vector<Index> permutation(std::size_t n) {
        std::vector<Index> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<Index>(i);
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = bounded(i);
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace aptc
