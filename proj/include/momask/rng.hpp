#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace momask {

// Deterministic RNG. All distributions are derived from raw mt19937_64 draws
// by hand so that streams are bit-identical across compilers and platforms
// (the std:: distribution objects are implementation-defined).
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    uint64_t uniform_int(uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
        return static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    // standard Gumbel(0,1); u clamped away from 0 so the result is finite
    double gumbel() {
        double u = uniform();
        if (u < 1e-300) u = 1e-300;
        return -std::log(-std::log(u));
    }

    double normal() {
        // Box-Muller, no caching: one value per two draws keeps the stream simple
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // index sampled proportionally to non-negative weights
    size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw std::invalid_argument("categorical: weights sum to zero");
        double r = uniform() * total;
        double acc = 0.0;
        for (size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (r < acc) return i;
        }
        return weights.size() - 1;
    }

    // deterministic in-place Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

// 64-bit FNV-1a, used for content-derived decisions (exchangeable over
// example order) and for output hashing in run manifests.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t fnv1a64_u64(uint64_t v, uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a64(&v, sizeof(v), h);
}

} // namespace momask
