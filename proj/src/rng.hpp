#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace lcfed {

// splitmix64 finalizer; used to derive well-separated seeds for substreams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Folds several stream identifiers into one substream seed.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x8f1bbcdcbfa53e0bull;
    for (std::uint64_t p : parts) h = splitmix64(h ^ p);
    return h;
}

// Deterministic RNG. The engine is std::mt19937_64 (its sequence is pinned
// by the standard); every distribution is generated here rather than with
// std::*_distribution so draws are identical on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Unbiased integer in [0, n); n must be positive.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t lim = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= lim);
        return x % n;
    }

    // Standard normal via Box-Muller (no cached spare, two draws per call).
    double normal() {
        const double u1 = 1.0 - uniform01(); // (0, 1], keeps log finite
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.141592653589793238462643 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Gamma(alpha, 1) via Marsaglia-Tsang; boost trick for alpha < 1.
    double gamma(double alpha) {
        if (alpha < 1.0) {
            const double u = 1.0 - uniform01();
            return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = 1.0 - uniform01();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Symmetric Dirichlet(alpha) over n categories.
    std::vector<double> dirichlet(double alpha, std::size_t n) {
        std::vector<double> w(n);
        double sum = 0.0;
        for (auto& wi : w) {
            wi = gamma(alpha);
            sum += wi;
        }
        if (sum <= 0.0) { // all draws underflowed; fall back to uniform
            for (auto& wi : w) wi = 1.0 / static_cast<double>(n);
            return w;
        }
        for (auto& wi : w) wi /= sum;
        return w;
    }

    // Draws from a categorical distribution given its probability vector.
    std::size_t categorical(const std::vector<double>& p) {
        double u = uniform01();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            acc += p[i];
            if (u < acc) return i;
        }
        return p.empty() ? 0 : p.size() - 1;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_int(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

} // namespace lcfed
