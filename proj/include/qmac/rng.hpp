#pragma once

#include <cstdint>
#include <vector>

namespace qmac {

// SplitMix64 (Steele, Lea, Flood 2014). Pinned as the project-wide generator:
// tiny state, identical output on every platform, cheap stream derivation.
// Reference outputs for seed 0 are frozen in tests/test_rng.cpp.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform double in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    std::uint64_t uniform_int(std::uint64_t n) {
        // rejection sampling, unbiased
        std::uint64_t threshold = (~n + 1) % n; // 2^64 mod n
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    // Exponential(1) via inversion; used for Dirichlet sampling.
    double exponential();

    // Dirichlet(1,...,1): uniform point on the probability simplex.
    std::vector<double> dirichlet(std::size_t k);

    // index sampled from a normalized probability vector
    std::size_t sample(const std::vector<double>& p);

    // Independent stream derived from (seed, index); streams for distinct
    // indices are decorrelated by remixing through the output function.
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t index);

private:
    std::uint64_t state_;
};

} // namespace qmac
