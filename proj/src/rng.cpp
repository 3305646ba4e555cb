#include "qmac/rng.hpp"

#include <cmath>

namespace qmac {

double SplitMix64::exponential() {
    double u;
    do {
        u = uniform();
    } while (u <= 0.0);
    return -std::log(u);
}

std::vector<double> SplitMix64::dirichlet(std::size_t k) {
    std::vector<double> out(k);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        out[i] = exponential();
        sum += out[i];
    }
    for (auto& x : out) x /= sum;
    return out;
}

std::size_t SplitMix64::sample(const std::vector<double>& p) {
    double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc) return i;
    }
    return p.size() - 1;
}

SplitMix64 SplitMix64::stream(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mixer(seed);
    std::uint64_t a = mixer.next();
    SplitMix64 idx(index ^ 0xA0761D6478BD642FULL);
    return SplitMix64(a ^ idx.next());
}

} // namespace qmac
