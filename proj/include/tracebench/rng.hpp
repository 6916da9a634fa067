#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "tracebench/common.hpp"

namespace tracebench {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Stage/episode seeds derive from a root seed and a tag, so adding a stage
// never perturbs the randomness of existing ones.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index = 0) {
    return splitmix64(splitmix64(root ^ fnv1a64(tag)) + index);
}

// Deterministic sampler. mt19937_64's raw output is pinned by the standard;
// every distribution below is implemented explicitly so streams never depend
// on the standard library's (implementation-defined) distribution code.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t bits() { return gen_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // 0..n-1
    int uniform_int(int n) {
        double u = uniform();
        int k = static_cast<int>(u * n);
        return k >= n ? n - 1 : k;
    }

    double normal() {
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Inversion; fine for the small intensities used here.
    int poisson(double lambda) {
        double p = std::exp(-lambda);
        double cum = p;
        double u = uniform();
        int k = 0;
        while (u > cum && k < 1000) {
            ++k;
            p *= lambda / k;
            cum += p;
        }
        return k;
    }

    // Marsaglia-Tsang for shape >= 1; the boost trick below 1.
    double gamma(double shape) {
        if (shape < 1.0) {
            double u = uniform();
            while (u <= 0.0) u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            double v = t * t * t;
            double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        double x = gamma(a);
        double y = gamma(b);
        return x / (x + y);
    }

    // Single-uniform scan; assumes probs sum to ~1.
    int categorical(std::span<const double> probs) {
        double u = uniform();
        double cum = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            cum += probs[i];
            if (u < cum) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

private:
    std::mt19937_64 gen_;
};

} // namespace tracebench
